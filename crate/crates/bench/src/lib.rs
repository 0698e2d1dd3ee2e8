//! Shared fixtures for the criterion benchmarks.

use stegdist_core::synthetic::{half_flat_composite, noise_image};
use stegdist_core::GrayImage;

/// Square image sizes exercised by the benchmarks.
pub const SIZES: [usize; 2] = [128, 256];

pub fn noise(size: usize) -> GrayImage {
    noise_image(size, size, 7)
}

pub fn composite(size: usize) -> GrayImage {
    half_flat_composite(size, size, 2024)
}
