//! Payload distribution models: cost → change probability, entropy
//! accounting and the Lagrangian multiplier solve.
//!
//! All probabilities stored in a [`ProbabilityMap`] are per change
//! direction: a regular pixel changes by +1 with probability `p`, by -1
//! with probability `p` and stays with probability `1 - 2p`. A saturated
//! pixel (intensity 0 or 255) has a single feasible direction, taken with
//! probability `p`.
//!
//! Saturated pixels use the two-letter analogue of each model, so that
//! `λ = 0` gives the uniform distribution over the feasible alphabet:
//!
//! | model       | regular               | saturated               |
//! |-------------|-----------------------|-------------------------|
//! | Exponential | `1 / (e^{λρ} + 2)`    | `1 / (e^{λρ} + 1)`      |
//! | Linear      | `max(1/3 - λρ, 0)`    | `3/2 · max(1/3 - λρ, 0)`|
//! | Uniform     | `1/3 · θ(1 - λρ)`     | `1/2 · θ(1 - λρ)`       |
//! | Polynomial  | `1/3 · max(1 - λρ, 0)²`| `1/2 · max(1 - λρ, 0)²`|
//!
//! The thresholded models keep the same cut-off cost for both pixel kinds.

mod solve;

pub use solve::{
    solve_lambda, solve_lambda_flat, solver_tolerance, BISECTION_ITERATIONS, MAX_DOUBLINGS,
};

use std::fmt;
use std::str::FromStr;

use crate::costs::{is_wet, CostMap};
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, pairwise_sum};

pub const LOG2_3: f64 = 1.584_962_500_721_156_2;

const THIRD: f64 = 1.0 / 3.0;

/// How costs are turned into change probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistributionModel {
    /// Gibbs distribution, `p ∝ e^{-λρ}`.
    Exponential,
    /// Water-filling style linear measure, `max(1/3 - λρ, 0)`.
    Linear,
    /// Step function: full rate below the cost threshold, nothing above.
    Uniform,
    /// Squared linear ramp, `1/3 · max(1 - λρ, 0)²`.
    Polynomial,
}

impl DistributionModel {
    pub const ALL: [DistributionModel; 4] = [
        DistributionModel::Exponential,
        DistributionModel::Linear,
        DistributionModel::Uniform,
        DistributionModel::Polynomial,
    ];

    /// Short name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            DistributionModel::Exponential => "exp",
            DistributionModel::Linear => "linear",
            DistributionModel::Uniform => "uniform",
            DistributionModel::Polynomial => "poly",
        }
    }

    /// Whether entropy is continuous in λ (bisection applies).
    pub fn is_continuous(self) -> bool {
        !matches!(self, DistributionModel::Uniform)
    }
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(DistributionModel::Exponential),
            "linear" | "lin" => Ok(DistributionModel::Linear),
            "uniform" | "unif" => Ok(DistributionModel::Uniform),
            "poly" | "polynomial" => Ok(DistributionModel::Polynomial),
            other => Err(format!(
                "unknown distribution model {other:?} (expected exp, linear, uniform or poly)"
            )),
        }
    }
}

/// Unchecked per-direction change probability; `rho * lambda` must not be NaN.
#[inline]
pub(crate) fn prob(model: DistributionModel, rho: f64, lambda: f64, saturated: bool) -> f64 {
    let t = lambda * rho;
    match model {
        DistributionModel::Exponential => {
            // Stable for large λρ: e^{λρ} overflows to inf and p to 0.
            let e = t.exp();
            if saturated {
                1.0 / (e + 1.0)
            } else {
                1.0 / (e + 2.0)
            }
        }
        DistributionModel::Linear => {
            let p = if t >= THIRD { 0.0 } else { THIRD - t };
            if saturated {
                1.5 * p
            } else {
                p
            }
        }
        DistributionModel::Uniform => {
            if t < 1.0 {
                if saturated {
                    0.5
                } else {
                    THIRD
                }
            } else {
                0.0
            }
        }
        DistributionModel::Polynomial => {
            let s = 1.0 - t;
            if s <= 0.0 {
                0.0
            } else if saturated {
                0.5 * s * s
            } else {
                THIRD * s * s
            }
        }
    }
}

/// Natural log of [`prob`], accurate where the probability underflows.
pub(crate) fn ln_prob(model: DistributionModel, rho: f64, lambda: f64, saturated: bool) -> f64 {
    if model == DistributionModel::Exponential && lambda.is_finite() {
        // ln(e^t + c) = t + ln(1 + c e^{-t}) for t >= 0.
        let t = lambda * rho;
        let c = if saturated { 1.0 } else { 2.0 };
        -(t + (c * (-t).exp()).ln_1p())
    } else {
        prob(model, rho, lambda, saturated).ln()
    }
}

fn check_inputs(rho: f64, lambda: f64) -> Result<()> {
    if !(rho >= 0.0) {
        return Err(Error::NegativeInput(rho));
    }
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(Error::NegativeInput(lambda));
    }
    Ok(())
}

/// Probability of each single change (+1 or -1) at a regular pixel.
pub fn change_prob(model: DistributionModel, rho: f64, lambda: f64) -> Result<f64> {
    check_inputs(rho, lambda)?;
    Ok(prob(model, rho, lambda, false))
}

/// Probability of the single feasible change at a saturated pixel.
pub fn saturated_change_prob(model: DistributionModel, rho: f64, lambda: f64) -> Result<f64> {
    check_inputs(rho, lambda)?;
    Ok(prob(model, rho, lambda, true))
}

#[inline]
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Unchecked entropy of one pixel in bits.
#[inline]
pub(crate) fn entropy_bits(p: f64, saturated: bool) -> f64 {
    if saturated {
        -xlog2x(p) - xlog2x(1.0 - p)
    } else {
        -2.0 * xlog2x(p) - xlog2x(1.0 - 2.0 * p)
    }
}

/// Entropy in bits of a pixel's change distribution: ternary
/// `{p, 1 - 2p, p}` for regular pixels, binary `{p, 1 - p}` for saturated.
pub fn pixel_entropy(p: f64, saturated: bool) -> Result<f64> {
    let bound = if saturated { 0.5 } else { THIRD };
    if !(0.0..=bound).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(entropy_bits(p, saturated))
}

fn check_saturation(costs: &CostMap, saturation: &[bool]) -> Result<()> {
    if saturation.len() != costs.len() {
        return Err(Error::DimensionMismatch {
            expected: (costs.height(), costs.width()),
            found: (saturation.len(), 1),
        });
    }
    Ok(())
}

/// Entropy of the flat cost vector at `lambda`; wet pixels contribute 0.
pub(crate) fn entropy_at(
    costs: &[f64],
    saturation: &[bool],
    model: DistributionModel,
    lambda: f64,
) -> f64 {
    pairwise_sum(costs.len(), &|k| {
        let rho = costs[k];
        if is_wet(rho) {
            0.0
        } else {
            entropy_bits(prob(model, rho, lambda, saturation[k]), saturation[k])
        }
    })
}

/// Total entropy in bits of the probability map induced by `lambda`.
pub fn total_entropy(
    costs: &CostMap,
    saturation: &[bool],
    model: DistributionModel,
    lambda: f64,
) -> Result<f64> {
    check_saturation(costs, saturation)?;
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(Error::NegativeInput(lambda));
    }
    Ok(entropy_at(costs.costs(), saturation, model, lambda))
}

pub(crate) fn capacity_of(costs: &[f64], saturation: &[bool]) -> f64 {
    let (mut regular, mut saturated) = (0usize, 0usize);
    for (&rho, &sat) in costs.iter().zip(saturation) {
        if is_wet(rho) {
            continue;
        }
        if sat {
            saturated += 1;
        } else {
            regular += 1;
        }
    }
    regular as f64 * LOG2_3 + saturated as f64
}

/// Largest embeddable payload in bits: the entropy at `λ = 0`.
pub fn max_capacity(costs: &CostMap, saturation: &[bool]) -> Result<f64> {
    check_saturation(costs, saturation)?;
    Ok(capacity_of(costs.costs(), saturation))
}

/// Message length, absolute or relative to the pixel count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PayloadSpec {
    /// Bits per pixel, in `[0, log2 3]`.
    Relative(f64),
    /// Total message bits.
    Bits(f64),
}

impl PayloadSpec {
    pub fn relative(alpha: f64) -> Result<Self> {
        if !(0.0..=LOG2_3).contains(&alpha) {
            return Err(Error::InvalidPayload(alpha));
        }
        Ok(PayloadSpec::Relative(alpha))
    }

    /// Message length in bits for an image of `pixels` pixels.
    pub fn message_bits(self, pixels: usize) -> Result<f64> {
        match self {
            PayloadSpec::Relative(alpha) => {
                if !(0.0..=LOG2_3).contains(&alpha) {
                    return Err(Error::InvalidPayload(alpha));
                }
                Ok(alpha * pixels as f64)
            }
            PayloadSpec::Bits(m) => {
                if !(m >= 0.0) || !m.is_finite() {
                    return Err(Error::NegativeInput(m));
                }
                Ok(m)
            }
        }
    }
}

/// Per-pixel change probabilities together with the solved multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    p_change: Vec<f64>,
    saturated: Vec<bool>,
    /// `f64::INFINITY` marks the zero-payload (nothing embedded) solution.
    lambda: f64,
    model: DistributionModel,
}

impl ProbabilityMap {
    pub fn from_parts(
        width: usize,
        height: usize,
        p_change: Vec<f64>,
        saturated: Vec<bool>,
        lambda: f64,
        model: DistributionModel,
    ) -> Self {
        assert_eq!(p_change.len(), width * height);
        assert_eq!(saturated.len(), width * height);
        Self {
            width,
            height,
            p_change,
            saturated,
            lambda,
            model,
        }
    }

    /// Probability map produced by `model` at a given `lambda`.
    pub fn at_lambda(
        costs: &CostMap,
        saturation: &[bool],
        model: DistributionModel,
        lambda: f64,
    ) -> Result<Self> {
        check_saturation(costs, saturation)?;
        if !(lambda >= 0.0) || lambda.is_infinite() {
            return Err(Error::NegativeInput(lambda));
        }
        let p = costs
            .costs()
            .iter()
            .zip(saturation)
            .map(|(&rho, &sat)| {
                if is_wet(rho) {
                    0.0
                } else {
                    prob(model, rho, lambda, sat)
                }
            })
            .collect();
        Ok(Self::from_parts(
            costs.width(),
            costs.height(),
            p,
            saturation.to_vec(),
            lambda,
            model,
        ))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.p_change.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.p_change.is_empty()
    }

    #[inline]
    pub fn probabilities(&self) -> &[f64] {
        &self.p_change
    }

    #[inline]
    pub fn saturation(&self) -> &[bool] {
        &self.saturated
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// True for the zero-payload solution, where λ is unbounded.
    pub fn is_saturating(&self) -> bool {
        self.lambda.is_infinite()
    }

    #[inline]
    pub fn model(&self) -> DistributionModel {
        self.model
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.p_change[row * self.width + col]
    }

    /// Probability that pixel `k` changes at all.
    #[inline]
    pub fn total_change_prob(&self, k: usize) -> f64 {
        if self.saturated[k] {
            self.p_change[k]
        } else {
            2.0 * self.p_change[k]
        }
    }

    /// Entropy of the map in bits (pairwise summation in row-major order).
    pub fn entropy(&self) -> f64 {
        pairwise_sum(self.len(), &|k| {
            entropy_bits(self.p_change[k], self.saturated[k])
        })
    }

    /// Expected fraction of pixels changed.
    pub fn expected_change_rate(&self) -> f64 {
        pairwise_sum(self.len(), &|k| self.total_change_prob(k)) / self.len() as f64
    }

    /// Sub-map covering `len` pixels starting at `offset`, reshaped to
    /// `width × height`.
    pub(crate) fn slice(&self, offset: usize, width: usize, height: usize) -> Self {
        let range = offset..offset + width * height;
        Self::from_parts(
            width,
            height,
            self.p_change[range.clone()].to_vec(),
            self.saturated[range].to_vec(),
            self.lambda,
            self.model,
        )
    }

    /// Serializes the per-direction probabilities in the real-matrix format.
    pub fn to_bytes(&self) -> Vec<u8> {
        crate::costs::write_real_matrix(self.height, self.width, &self.p_change)
    }
}

/// Expected additive distortion `Σ ρ · P(pixel changes)`.
pub fn expected_distortion(costs: &CostMap, pm: &ProbabilityMap) -> Result<f64> {
    if (costs.width(), costs.height()) != (pm.width(), pm.height()) {
        return Err(Error::DimensionMismatch {
            expected: (costs.height(), costs.width()),
            found: (pm.height(), pm.width()),
        });
    }
    let rho = costs.costs();
    Ok(pairwise_sum(pm.len(), &|k| {
        let p = pm.total_change_prob(k);
        if p == 0.0 {
            0.0
        } else {
            rho[k] * p
        }
    }))
}

/// Natural log of the total per-direction probability mass over the pixels
/// selected by `mask(row, col)`, excluding wet pixels.
///
/// For the exponential model the terms are evaluated in the log domain, so
/// pixels whose probability underflows `f64` still count with their true
/// (tiny, positive) mass. Returns `-inf` when the mass is exactly zero.
pub fn region_log_mass(
    costs: &CostMap,
    pm: &ProbabilityMap,
    mask: impl Fn(usize, usize) -> bool,
) -> Result<f64> {
    if (costs.width(), costs.height()) != (pm.width(), pm.height()) {
        return Err(Error::DimensionMismatch {
            expected: (costs.height(), costs.width()),
            found: (pm.height(), pm.width()),
        });
    }
    let mut terms = Vec::new();
    for k in 0..pm.len() {
        let (row, col) = (k / pm.width(), k % pm.width());
        if !mask(row, col) || costs.is_wet(k) {
            continue;
        }
        let term = match pm.model() {
            DistributionModel::Exponential if !pm.is_saturating() => ln_prob(
                pm.model(),
                costs.costs()[k],
                pm.lambda(),
                pm.saturation()[k],
            ),
            _ => pm.probabilities()[k].ln(),
        };
        terms.push(term);
    }
    Ok(log_sum_exp(&terms))
}
