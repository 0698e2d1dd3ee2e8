//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the convolution engine or the solver; the
//! oracles re-derive every quantity with explicit loops.

#![allow(dead_code)]

use stegdist_core::costs::{db8_lowpass, WET_THRESHOLD};
use stegdist_core::GrayImage;

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

fn at(values: &[f64], width: usize, height: usize, i: isize, j: isize) -> f64 {
    values[reflect(i, height) * width + reflect(j, width)]
}

/// Direct evaluation of `L15 ⋆ (1 / (L3 ⋆ |KB ⋆ X|))`.
pub fn hill_oracle(img: &GrayImage) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let x: Vec<f64> = img.pixels().iter().map(|&v| v as f64).collect();
    let kb = [[-1.0, 2.0, -1.0], [2.0, -4.0, 2.0], [-1.0, 2.0, -1.0]];
    let mut magnitude = vec![0.0; w * h];
    for i in 0..h as isize {
        for j in 0..w as isize {
            let mut acc = 0.0;
            for a in -1..=1isize {
                for b in -1..=1isize {
                    acc += kb[(a + 1) as usize][(b + 1) as usize] * at(&x, w, h, i + a, j + b);
                }
            }
            magnitude[i as usize * w + j as usize] = acc.abs();
        }
    }
    let mut inner = vec![0.0; w * h];
    for i in 0..h as isize {
        for j in 0..w as isize {
            let mut acc = 0.0;
            for a in -1..=1isize {
                for b in -1..=1isize {
                    acc += at(&magnitude, w, h, i + a, j + b) / 9.0;
                }
            }
            inner[i as usize * w + j as usize] = if acc == 0.0 { WET_THRESHOLD } else { 1.0 / acc };
        }
    }
    let mut out = vec![0.0; w * h];
    for i in 0..h as isize {
        for j in 0..w as isize {
            let mut acc = 0.0;
            for a in -7..=7isize {
                for b in -7..=7isize {
                    acc += at(&inner, w, h, i + a, j + b) / 225.0;
                }
            }
            out[i as usize * w + j as usize] = acc.clamp(0.0, WET_THRESHOLD);
        }
    }
    out
}

/// Direct evaluation of the three-direction S-UNIWARD sum with 16-tap
/// filters anchored at tap 8.
pub fn suniward_oracle(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let x: Vec<f64> = img.pixels().iter().map(|&v| v as f64).collect();
    let lo = db8_lowpass();
    let hi: Vec<f64> = (0..16)
        .map(|k| if k % 2 == 0 { lo[15 - k] } else { -lo[15 - k] })
        .collect();
    let pairs: [(&[f64], &[f64]); 3] = [(&lo, &hi), (&hi, &lo), (&hi, &hi)];
    let mut out = vec![0.0; w * h];
    for (col_taps, row_taps) in pairs {
        let kernel = |a: usize, b: usize| col_taps[a] * row_taps[b];
        let mut weight = vec![0.0; w * h];
        for i in 0..h as isize {
            for j in 0..w as isize {
                let mut acc = 0.0;
                for a in 0..16 {
                    for b in 0..16 {
                        acc += kernel(a, b) * at(&x, w, h, i + a as isize - 8, j + b as isize - 8);
                    }
                }
                weight[i as usize * w + j as usize] = 1.0 / (sigma + acc.abs());
            }
        }
        for i in 0..h as isize {
            for j in 0..w as isize {
                let mut acc = 0.0;
                for a in 0..16 {
                    for b in 0..16 {
                        acc += kernel(a, b).abs()
                            * at(&weight, w, h, i + a as isize - 8, j + b as isize - 8);
                    }
                }
                out[i as usize * w + j as usize] += acc;
            }
        }
    }
    out.iter_mut()
        .for_each(|v| *v = v.clamp(0.0, WET_THRESHOLD));
    out
}

pub fn max_relative_error(actual: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(actual.len(), expected.len());
    actual
        .iter()
        .zip(expected)
        .map(|(a, e)| {
            if *e == 0.0 {
                a.abs()
            } else {
                ((a - e) / e).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Ternary entropy in bits.
pub fn h3(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    2.0 * term(p) + term(1.0 - 2.0 * p)
}

/// Inverse of `h3` on `[0, 1/3]` by bisection.
pub fn h3_inverse(bits: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0 / 3.0);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if h3(mid) < bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Tabulated `h3` inverse refined by safeguarded Newton steps.
pub struct H3Inverse {
    table: Vec<f64>,
    step: f64,
}

impl H3Inverse {
    const POINTS: usize = 1 << 14;

    pub fn new() -> Self {
        let step = h3(1.0 / 3.0) / (Self::POINTS - 1) as f64;
        let table = (0..Self::POINTS)
            .map(|k| h3_inverse(k as f64 * step))
            .collect();
        Self { table, step }
    }

    /// `p` in `[0, 1/3]` with `|h3(p) - bits| < 1e-10`, falling back to
    /// bisection when Newton does not get there.
    pub fn invert(&self, bits: f64) -> f64 {
        let x = bits / self.step;
        let k = (x.floor() as usize).min(Self::POINTS - 2);
        let t = x - k as f64;
        let mut p = self.table[k] * (1.0 - t) + self.table[k + 1] * t;
        for _ in 0..4 {
            let err = h3(p) - bits;
            if err.abs() < 1e-12 {
                return p;
            }
            let slope = 2.0 * ((1.0 - 2.0 * p) / p).log2();
            if !(slope > 1e-6) {
                break;
            }
            p = (p - err / slope).clamp(0.0, 1.0 / 3.0);
        }
        if (h3(p) - bits).abs() < 1e-10 {
            p
        } else {
            h3_inverse(bits)
        }
    }
}

impl Default for H3Inverse {
    fn default() -> Self {
        Self::new()
    }
}

/// Smallest expected distortion `Σ 2 ρ_i p_i` over symmetric ternary
/// distributions on three pixels with `Σ h3(p_i) = bits`.
///
/// A 1e-3 grid over `(p1, p2)` with `p3` solved from the constraint, then a
/// 1e-5 grid over the ±2e-3 box around the best grid point. Every evaluated
/// point meets the constraint within 1e-4 bits.
pub fn brute_force_min_distortion(inverse: &H3Inverse, rho: [f64; 3], bits: f64) -> f64 {
    let cap = h3(1.0 / 3.0);
    let eval = |p1: f64, p2: f64| -> Option<f64> {
        if !(0.0..=1.0 / 3.0).contains(&p1) || !(0.0..=1.0 / 3.0).contains(&p2) {
            return None;
        }
        let rest = bits - h3(p1) - h3(p2);
        if !(0.0..=cap).contains(&rest) {
            return None;
        }
        let p3 = inverse.invert(rest);
        if (h3(p1) + h3(p2) + h3(p3) - bits).abs() > 1e-4 {
            return None;
        }
        Some(2.0 * (rho[0] * p1 + rho[1] * p2 + rho[2] * p3))
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for a in 0..=333 {
        for b in 0..=333 {
            let (p1, p2) = (a as f64 * 1e-3, b as f64 * 1e-3);
            if let Some(d) = eval(p1, p2) {
                if d < best.0 {
                    best = (d, p1, p2);
                }
            }
        }
    }
    let (_, c1, c2) = best;
    for a in -200..=200 {
        for b in -200..=200 {
            let (p1, p2) = (c1 + a as f64 * 1e-5, c2 + b as f64 * 1e-5);
            if let Some(d) = eval(p1, p2) {
                best.0 = best.0.min(d);
            }
        }
    }
    best.0
}
