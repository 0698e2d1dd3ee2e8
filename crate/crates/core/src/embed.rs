//! Simulated embedding: sampling change maps from probability maps, and
//! single-image and grouped (parallel) embedding.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::costs::{hill_cost, suniward_cost, CostMap};
use crate::distribution::{
    expected_distortion, solve_lambda_flat, DistributionModel, PayloadSpec, ProbabilityMap,
};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::rng::counter_uniform;

/// Cost function used to price pixel changes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CostFunction {
    Hill,
    SUniward { sigma: f64 },
}

impl CostFunction {
    pub fn compute(&self, img: &GrayImage) -> Result<CostMap> {
        match *self {
            CostFunction::Hill => hill_cost(img),
            CostFunction::SUniward { sigma } => suniward_cost(img, sigma),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CostFunction::Hill => "hill",
            CostFunction::SUniward { .. } => "suniward",
        }
    }
}

impl fmt::Display for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostFunction {
    type Err = String;

    /// Parses a cost function name; S-UNIWARD gets `sigma = 1`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "hill" => Ok(CostFunction::Hill),
            "suniward" => Ok(CostFunction::SUniward { sigma: 1.0 }),
            other => Err(format!(
                "unknown cost function {other:?} (expected hill or suniward)"
            )),
        }
    }
}

/// Realized per-pixel changes `S = Y - X`, each in `{-1, 0, +1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChangeMap {
    width: usize,
    height: usize,
    changes: Vec<i8>,
}

impl ChangeMap {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn changes(&self) -> &[i8] {
        &self.changes
    }

    pub fn changed_count(&self) -> usize {
        self.changes.iter().filter(|&&c| c != 0).count()
    }

    /// Stego image `cover + changes`.
    pub fn apply(&self, cover: &GrayImage) -> Result<GrayImage> {
        check_dims(cover, self.width, self.height)?;
        let pixels = cover
            .pixels()
            .iter()
            .zip(&self.changes)
            .map(|(&x, &s)| (i16::from(x) + i16::from(s)) as u8)
            .collect();
        GrayImage::new(self.width, self.height, pixels)
    }

    /// Visualization with `-1 → 0`, `0 → 128`, `+1 → 255`.
    pub fn to_image(&self) -> GrayImage {
        let pixels = self
            .changes
            .iter()
            .map(|&s| match s {
                -1 => 0,
                0 => 128,
                _ => 255,
            })
            .collect();
        GrayImage::new(self.width, self.height, pixels).expect("valid dimensions")
    }
}

fn check_dims(img: &GrayImage, width: usize, height: usize) -> Result<()> {
    if (img.width(), img.height()) != (width, height) {
        return Err(Error::DimensionMismatch {
            expected: (height, width),
            found: (img.height(), img.width()),
        });
    }
    Ok(())
}

/// Fraction of pixels that changed.
pub fn change_rate(cm: &ChangeMap) -> f64 {
    cm.changed_count() as f64 / cm.changes.len() as f64
}

/// Draws one change per pixel from the probability map.
///
/// Pixel `k` (row-major) uses draw `u = U(seed, k)` from
/// [`counter_uniform`]. A regular pixel moves +1 when `u < p`, -1 when
/// `p <= u < 2p`, and stays otherwise. A pixel at 0 or 255 moves in its
/// only feasible direction when `u < p`.
pub fn sample_changes(cover: &GrayImage, pm: &ProbabilityMap, seed: u64) -> Result<ChangeMap> {
    check_dims(cover, pm.width(), pm.height())?;
    let p = pm.probabilities();
    let changes = cover
        .pixels()
        .par_iter()
        .enumerate()
        .map(|(k, &x)| {
            let u = counter_uniform(seed, k as u64);
            match x {
                0 => i8::from(u < p[k]),
                255 => -i8::from(u < p[k]),
                _ if u < p[k] => 1,
                _ if u < 2.0 * p[k] => -1,
                _ => 0,
            }
        })
        .collect();
    Ok(ChangeMap {
        width: cover.width(),
        height: cover.height(),
        changes,
    })
}

/// Outcome of embedding into one cover.
#[derive(Clone, Debug)]
pub struct StegoResult {
    pub stego: GrayImage,
    pub changes: ChangeMap,
    pub realized_change_rate: f64,
    pub probability_map: ProbabilityMap,
    /// Entropy of the probability map in bits.
    pub expected_entropy: f64,
    pub expected_distortion: f64,
    pub costs: CostMap,
}

/// How a grouped embedding split its payload.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAllocation {
    /// Entropy in bits carried by each image.
    pub shares: Vec<f64>,
    pub lambda: f64,
    pub total_payload: f64,
    pub distortions: Vec<f64>,
}

/// Embeds `payload` into a single cover.
pub fn embed_single(
    cover: &GrayImage,
    cost_fn: CostFunction,
    model: DistributionModel,
    payload: PayloadSpec,
    seed: u64,
) -> Result<StegoResult> {
    let costs = cost_fn.compute(cover)?;
    let m = payload.message_bits(cover.len())?;
    let (mut results, _) = embed_with_costs(&[cover], vec![costs], model, m, seed)?;
    Ok(results.remove(0))
}

/// Embeds `alpha · Σ pixels` bits into a group of covers with one shared λ.
///
/// Costs are computed per image, then concatenated into one vector for a
/// single solve. Image `i` samples its changes with seed `seed + i`.
pub fn embed_parallel(
    covers: &[GrayImage],
    cost_fn: CostFunction,
    model: DistributionModel,
    alpha: f64,
    seed: u64,
) -> Result<(Vec<StegoResult>, GroupAllocation)> {
    if covers.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let costs = covers
        .par_iter()
        .map(|c| cost_fn.compute(c))
        .collect::<Result<Vec<_>>>()?;
    let pixels: usize = covers.iter().map(GrayImage::len).sum();
    let m = PayloadSpec::relative(alpha)?.message_bits(pixels)?;
    let refs: Vec<&GrayImage> = covers.iter().collect();
    embed_with_costs(&refs, costs, model, m, seed)
}

/// Grouped embedding from precomputed cost maps.
pub fn embed_with_costs(
    covers: &[&GrayImage],
    costs: Vec<CostMap>,
    model: DistributionModel,
    total_bits: f64,
    seed: u64,
) -> Result<(Vec<StegoResult>, GroupAllocation)> {
    if covers.is_empty() {
        return Err(Error::EmptyGroup);
    }
    assert_eq!(covers.len(), costs.len());
    let mut flat_costs = Vec::new();
    let mut flat_sat = Vec::new();
    for (cover, cm) in covers.iter().zip(&costs) {
        check_dims(cover, cm.width(), cm.height())?;
        flat_costs.extend_from_slice(cm.costs());
        flat_sat.extend(cover.saturation_flags());
    }
    let (p, lambda) = solve_lambda_flat(&flat_costs, &flat_sat, total_bits, model)?;
    let group = ProbabilityMap::from_parts(p.len(), 1, p, flat_sat, lambda, model);

    let mut offsets = Vec::with_capacity(covers.len());
    let mut offset = 0;
    for cover in covers {
        offsets.push(offset);
        offset += cover.len();
    }

    let results = covers
        .par_iter()
        .zip(costs)
        .zip(offsets)
        .enumerate()
        .map(|(i, ((cover, cm), offset))| {
            let pm = group.slice(offset, cover.width(), cover.height());
            let changes = sample_changes(cover, &pm, seed.wrapping_add(i as u64))?;
            let stego = changes.apply(cover)?;
            Ok(StegoResult {
                realized_change_rate: change_rate(&changes),
                expected_entropy: pm.entropy(),
                expected_distortion: expected_distortion(&cm, &pm)?,
                stego,
                changes,
                probability_map: pm,
                costs: cm,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let allocation = GroupAllocation {
        shares: results.iter().map(|r| r.expected_entropy).collect(),
        lambda,
        total_payload: total_bits,
        distortions: results.iter().map(|r| r.expected_distortion).collect(),
    };
    Ok((results, allocation))
}
