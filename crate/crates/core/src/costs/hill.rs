//! HILL costs: a Ker-Böhme high-pass residual, a 3×3 average of its
//! magnitude, the reciprocal, then a 15×15 average.

use super::convolve::{correlate_mirror, Kernel, Matrix};
use super::{CostMap, WET_THRESHOLD};
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Smallest accepted side length (the 15×15 low-pass must fit).
pub const HILL_MIN_SIZE: usize = 15;

const SMALL_LOWPASS: usize = 3;
const LARGE_LOWPASS: usize = 15;

/// The 3×3 Ker-Böhme high-pass kernel.
pub fn ker_bohme_kernel() -> Kernel {
    #[rustfmt::skip]
    let weights = vec![
        -1.0,  2.0, -1.0,
         2.0, -4.0,  2.0,
        -1.0,  2.0, -1.0,
    ];
    Kernel::new(3, 3, weights).expect("3x3 kernel")
}

/// Box average computed as a sum followed by a single division, so that a
/// window of identical values averages back to exactly that value.
fn box_average(x: &Matrix, size: usize) -> Matrix {
    let ones = Kernel::constant(size, 1.0).expect("odd box size");
    let mut out = correlate_mirror(x, &ones);
    let n = (size * size) as f64;
    out.map_in_place(|v| v / n);
    out
}

/// Computes `ρ = L15 ⊛ (1 / (L3 ⊛ |KB ⊛ X|))` with mirror padding.
///
/// Pixels whose smoothed residual magnitude is exactly zero contribute
/// [`WET_THRESHOLD`] to the final average; the result is clamped to
/// `[0, WET_THRESHOLD]`.
pub fn hill_cost(img: &GrayImage) -> Result<CostMap> {
    if img.width() < HILL_MIN_SIZE || img.height() < HILL_MIN_SIZE {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: HILL_MIN_SIZE,
        });
    }
    let x = Matrix::from_image(img);
    let mut residual = correlate_mirror(&x, &ker_bohme_kernel());
    residual.map_in_place(f64::abs);
    let mut inner = box_average(&residual, SMALL_LOWPASS);
    inner.map_in_place(|v| if v == 0.0 { WET_THRESHOLD } else { 1.0 / v });
    let smoothed = box_average(&inner, LARGE_LOWPASS);
    Ok(CostMap::from_matrix_clamped(smoothed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::counter_u64;

    fn noise(w: usize, h: usize, seed: u64) -> GrayImage {
        GrayImage::from_fn(w, h, |i, j| {
            (counter_u64(seed, (i * w + j) as u64) >> 56) as u8
        })
    }

    #[test]
    fn constant_image_is_fully_wet() {
        let costs = hill_cost(&GrayImage::filled(20, 17, 93)).unwrap();
        assert_eq!(costs.wet_count(), costs.len());
        assert!(costs.costs().iter().all(|&c| c == WET_THRESHOLD));
    }

    #[test]
    fn too_small() {
        assert!(matches!(
            hill_cost(&GrayImage::filled(14, 30, 1)),
            Err(Error::ImageTooSmall { min: 15, .. })
        ));
        assert!(hill_cost(&noise(15, 15, 1)).is_ok());
    }

    #[test]
    fn impulse_minimum_near_impulse() {
        let img = GrayImage::from_fn(32, 32, |i, j| if (i, j) == (16, 16) { 200 } else { 100 });
        let costs = hill_cost(&img).unwrap();
        let min = costs.costs().iter().copied().fold(f64::INFINITY, f64::min);
        // Wet neighbours dominate the 15x15 average, so the minimum is a
        // plateau around the impulse rather than a single pixel.
        assert_eq!(costs.get(16, 16), min);
        for r in 0..32 {
            for c in 0..32 {
                if costs.get(r, c) == min {
                    assert!(
                        r.abs_diff(16) <= 7 && c.abs_diff(16) <= 7,
                        "minimum at {r},{c}"
                    );
                }
            }
        }
        assert!(costs.get(0, 0) > min);
    }

    #[test]
    fn random_image_costs_positive_finite() {
        let costs = hill_cost(&noise(64, 64, 11)).unwrap();
        assert!(costs.costs().iter().all(|&c| c > 0.0 && c < WET_THRESHOLD));
    }

    #[test]
    fn negation_invariant() {
        let img = noise(40, 33, 5);
        let neg = GrayImage::from_fn(40, 33, |i, j| 255 - img.get(i, j));
        assert_eq!(hill_cost(&img).unwrap(), hill_cost(&neg).unwrap());
    }

    #[test]
    fn deterministic() {
        let img = noise(48, 48, 2);
        assert_eq!(hill_cost(&img).unwrap(), hill_cost(&img).unwrap());
    }
}
