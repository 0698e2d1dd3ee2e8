//! S-UNIWARD spatial costs from three directional Daubechies-8 filters.

use super::convolve::{correlate_mirror, Kernel, Matrix};
use super::CostMap;
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Smallest accepted side length (the 16-tap filters must fit).
pub const SUNIWARD_MIN_SIZE: usize = 16;

/// Daubechies-8 decomposition low-pass filter (16 taps).
const DB8_LOWPASS: [f64; 16] = [
    -0.000_117_476_784_002_281_92,
    0.000_675_449_405_998_556_8,
    -0.000_391_740_372_995_977_1,
    -0.004_870_352_993_010_66,
    0.008_746_094_047_015_655,
    0.013_981_027_917_015_516,
    -0.044_088_253_931_064_72,
    -0.017_369_301_002_022_11,
    0.128_747_426_620_186,
    0.000_472_484_573_997_972_54,
    -0.284_015_542_962_428_1,
    -0.015_829_105_256_023_893,
    0.585_354_683_654_869_1,
    0.675_630_736_298_012_8,
    0.312_871_590_914_465_9,
    0.054_415_842_243_081_61,
];

pub fn db8_lowpass() -> [f64; 16] {
    DB8_LOWPASS
}

/// Quadrature-mirror high-pass: `g[k] = (-1)^k h[15 - k]`.
fn db8_highpass() -> [f64; 16] {
    std::array::from_fn(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * DB8_LOWPASS[15 - k])
}

/// The 16-tap filters padded with a trailing zero so the kernels have a
/// center tap (index 8).
fn padded(taps: [f64; 16]) -> [f64; 17] {
    std::array::from_fn(|k| if k < 16 { taps[k] } else { 0.0 })
}

/// Directional kernels `h·gᵀ`, `g·hᵀ`, `g·gᵀ`, each 17×17 with a zero last
/// row and column.
pub fn suniward_kernels() -> [Kernel; 3] {
    let h = padded(DB8_LOWPASS);
    let g = padded(db8_highpass());
    [
        Kernel::outer(&h, &g).expect("odd"),
        Kernel::outer(&g, &h).expect("odd"),
        Kernel::outer(&g, &g).expect("odd"),
    ]
}

/// Computes `ρ = Σ_k |K_k| ⋆ (1 / (σ + |K_k ⋆ X|))` with mirror padding,
/// where `⋆` is correlation.
pub fn suniward_cost(img: &GrayImage, sigma: f64) -> Result<CostMap> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if img.width() < SUNIWARD_MIN_SIZE || img.height() < SUNIWARD_MIN_SIZE {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: SUNIWARD_MIN_SIZE,
        });
    }
    let x = Matrix::from_image(img);
    let mut total = Matrix::zeros(x.rows(), x.cols());
    for kernel in suniward_kernels() {
        let mut weight = correlate_mirror(&x, &kernel);
        weight.map_in_place(|r| 1.0 / (sigma + r.abs()));
        total.add_assign(&correlate_mirror(&weight, &kernel.abs()));
    }
    Ok(CostMap::from_matrix_clamped(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::counter_u64;

    #[test]
    fn db8_is_orthonormal() {
        let h = DB8_LOWPASS;
        let sum: f64 = h.iter().sum();
        assert!((sum - 2f64.sqrt()).abs() < 1e-10);
        let energy: f64 = h.iter().map(|v| v * v).sum();
        assert!((energy - 1.0).abs() < 1e-10);
        for shift in 1..8 {
            let dot: f64 = (0..16 - 2 * shift).map(|k| h[k] * h[k + 2 * shift]).sum();
            assert!(dot.abs() < 1e-10, "shift {shift}: {dot}");
        }
        let g = db8_highpass();
        assert!(g.iter().sum::<f64>().abs() < 1e-10);
        let cross: f64 = h.iter().zip(&g).map(|(a, b)| a * b).sum();
        assert!(cross.abs() < 1e-12);
    }

    #[test]
    fn constant_image_uniform_costs() {
        let sigma = 1.0;
        let costs = suniward_cost(&GrayImage::filled(24, 20, 77), sigma).unwrap();
        let expected: f64 = suniward_kernels()
            .iter()
            .map(|k| k.weights().iter().map(|w| w.abs()).sum::<f64>())
            .sum::<f64>()
            / sigma;
        for &c in costs.costs() {
            assert!(
                ((c - expected) / expected).abs() < 1e-9,
                "{c} vs {expected}"
            );
        }
    }

    #[test]
    fn decreasing_in_sigma() {
        let img = GrayImage::from_fn(20, 20, |i, j| {
            (counter_u64(3, (i * 20 + j) as u64) >> 56) as u8
        });
        let a = suniward_cost(&img, 0.5).unwrap();
        let b = suniward_cost(&img, 1.0).unwrap();
        let c = suniward_cost(&img, 4.0).unwrap();
        for k in 0..a.len() {
            assert!(a.costs()[k] > b.costs()[k] && b.costs()[k] > c.costs()[k]);
        }
    }

    #[test]
    fn errors() {
        let img = GrayImage::filled(16, 16, 3);
        assert!(suniward_cost(&img, 1.0).is_ok());
        assert!(matches!(
            suniward_cost(&img, 0.0),
            Err(Error::NonPositiveSigma(_))
        ));
        assert!(matches!(
            suniward_cost(&img, -1.0),
            Err(Error::NonPositiveSigma(_))
        ));
        assert!(matches!(
            suniward_cost(&img, f64::NAN),
            Err(Error::NonPositiveSigma(_))
        ));
        assert!(matches!(
            suniward_cost(&GrayImage::filled(15, 40, 3), 1.0),
            Err(Error::ImageTooSmall { min: 16, .. })
        ));
    }
}
