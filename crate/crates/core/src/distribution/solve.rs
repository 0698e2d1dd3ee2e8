//! Solving λ so that the total entropy equals the message length.

use super::{capacity_of, entropy_at, prob, DistributionModel, ProbabilityMap, LOG2_3};
use crate::costs::{is_wet, CostMap};
use crate::error::{Error, Result};

/// Upper bound on bisection steps.
pub const BISECTION_ITERATIONS: usize = 200;
/// Upper bound on bracket doublings for the exponential model.
pub const MAX_DOUBLINGS: usize = 200;

/// Accepted `|H(λ) - m|` in bits.
pub fn solver_tolerance(m: f64) -> f64 {
    (1e-6 * m).max(1e-9)
}

/// Finds the λ whose probability map carries `m` bits of entropy.
///
/// Continuous models bisect on `λ` (entropy is non-increasing in λ) until
/// the bracket collapses to adjacent floats or 200 steps elapse. The
/// uniform model activates the cheapest cost levels (all pixels sharing a
/// cost together) until their entropy reaches `m`; λ is then the reciprocal
/// of the lowest inactive cost, or 0 if every pixel is active.
///
/// `m = 0` yields an all-zero map whose λ is `f64::INFINITY`.
pub fn solve_lambda(
    costs: &CostMap,
    saturation: &[bool],
    m: f64,
    model: DistributionModel,
) -> Result<ProbabilityMap> {
    if saturation.len() != costs.len() {
        return Err(Error::DimensionMismatch {
            expected: (costs.height(), costs.width()),
            found: (saturation.len(), 1),
        });
    }
    let (p, lambda) = solve_lambda_flat(costs.costs(), saturation, m, model)?;
    Ok(ProbabilityMap::from_parts(
        costs.width(),
        costs.height(),
        p,
        saturation.to_vec(),
        lambda,
        model,
    ))
}

/// [`solve_lambda`] over a flat cost vector; returns `(probabilities, λ)`.
pub fn solve_lambda_flat(
    costs: &[f64],
    saturation: &[bool],
    m: f64,
    model: DistributionModel,
) -> Result<(Vec<f64>, f64)> {
    if costs.is_empty() {
        return Err(Error::EmptyImage);
    }
    assert_eq!(costs.len(), saturation.len());
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::NegativeInput(m));
    }
    let capacity = capacity_of(costs, saturation);
    let tol = solver_tolerance(m);
    if m - capacity > tol {
        return Err(Error::PayloadExceedsCapacity {
            requested: m,
            capacity,
        });
    }
    if m == 0.0 {
        return Ok((vec![0.0; costs.len()], f64::INFINITY));
    }
    if model.is_continuous() {
        let lambda = bisect(costs, saturation, m, model)?;
        Ok((probabilities(costs, saturation, model, lambda), lambda))
    } else {
        Ok(activate_prefix(costs, saturation, m))
    }
}

fn probabilities(
    costs: &[f64],
    saturation: &[bool],
    model: DistributionModel,
    lambda: f64,
) -> Vec<f64> {
    costs
        .iter()
        .zip(saturation)
        .map(|(&rho, &sat)| {
            if is_wet(rho) {
                0.0
            } else {
                prob(model, rho, lambda, sat)
            }
        })
        .collect()
}

fn bisect(costs: &[f64], saturation: &[bool], m: f64, model: DistributionModel) -> Result<f64> {
    let entropy = |lambda: f64| entropy_at(costs, saturation, model, lambda);
    let tol = solver_tolerance(m);
    if entropy(0.0) - m <= tol {
        return Ok(0.0);
    }

    // Smallest strictly positive dry cost; zero-cost pixels keep p at its
    // maximum for every finite λ.
    let min_cost = costs
        .iter()
        .copied()
        .filter(|&c| c > 0.0 && !is_wet(c))
        .fold(f64::INFINITY, f64::min);
    if min_cost == f64::INFINITY {
        return Err(Error::NumericalFailure(
            "no pixel with positive finite cost; entropy cannot be lowered".into(),
        ));
    }

    let mut hi = match model {
        DistributionModel::Linear => 1.0 / (3.0 * min_cost),
        DistributionModel::Polynomial => 1.0 / min_cost,
        _ => {
            let mut hi = 1.0;
            let mut doublings = 0;
            while entropy(hi) > m {
                if doublings == MAX_DOUBLINGS {
                    return Err(Error::NumericalFailure(format!(
                        "no λ bracket after {MAX_DOUBLINGS} doublings"
                    )));
                }
                hi *= 2.0;
                doublings += 1;
            }
            hi
        }
    };
    if entropy(hi) > m + tol {
        return Err(Error::NumericalFailure(format!(
            "payload of {m} bits is below the entropy floor of zero-cost pixels"
        )));
    }

    let mut lo = 0.0;
    for _ in 0..BISECTION_ITERATIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if entropy(mid) > m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (err_lo, err_hi) = ((entropy(lo) - m).abs(), (entropy(hi) - m).abs());
    let (lambda, err) = if err_lo < err_hi {
        (lo, err_lo)
    } else {
        (hi, err_hi)
    };
    if err > tol {
        return Err(Error::NumericalFailure(format!(
            "bisection stalled {err} bits from the target"
        )));
    }
    Ok(lambda)
}

fn activate_prefix(costs: &[f64], saturation: &[bool], m: f64) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..costs.len()).filter(|&k| !is_wet(costs[k])).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));

    // Whole cost levels are activated together, so the map is exactly
    // `θ(1 - λρ)` at the returned λ.
    let mut p = vec![0.0; costs.len()];
    let (mut regular, mut saturated) = (0usize, 0usize);
    let mut next = 0;
    while next < order.len() && regular as f64 * LOG2_3 + saturated as f64 * 1.0 < m {
        let level = costs[order[next]];
        while next < order.len() && costs[order[next]] == level {
            let k = order[next];
            p[k] = prob(DistributionModel::Uniform, 0.0, 0.0, saturation[k]);
            if saturation[k] {
                saturated += 1;
            } else {
                regular += 1;
            }
            next += 1;
        }
    }
    let lambda = match order.get(next) {
        None => 0.0,
        Some(&k) if costs[k] == 0.0 => f64::MAX,
        Some(&k) => 1.0 / costs[k],
    };
    (p, lambda)
}
