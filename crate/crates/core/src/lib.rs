//! Cost-based image steganography.
//!
//! The pipeline is: compute per-pixel costs ([`costs`]), turn them into
//! change probabilities under a payload constraint ([`distribution`]), then
//! simulate the embedding by sampling changes ([`embed`]). Several images
//! can share a single multiplier so the payload flows to the images that
//! hide it most cheaply ([`embed::embed_parallel`]).

pub mod costs;
pub mod distribution;
pub mod embed;
pub mod error;
pub mod image;
pub mod numeric;
pub mod rng;
pub mod synthetic;

pub use costs::{hill_cost, suniward_cost, CostMap, Kernel, Matrix, WET_THRESHOLD};
pub use distribution::{
    change_prob, expected_distortion, max_capacity, pixel_entropy, solve_lambda, total_entropy,
    DistributionModel, PayloadSpec, ProbabilityMap, LOG2_3,
};
pub use embed::{
    change_rate, embed_parallel, embed_single, sample_changes, ChangeMap, CostFunction,
    GroupAllocation, StegoResult,
};
pub use error::{Error, Result};
pub use image::{read_pgm, render_probability_heatmap, write_pgm, GrayImage};
