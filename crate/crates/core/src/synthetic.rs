//! Generated test images used by the comparison metrics and test suites.

use crate::image::GrayImage;
use crate::rng::counter_u64;

/// Intensity of the flat half of [`half_flat_composite`].
pub const FLAT_LEVEL: u8 = 128;

/// Uniform noise over the full 8-bit range.
pub fn noise_image(width: usize, height: usize, seed: u64) -> GrayImage {
    GrayImage::from_fn(width, height, |i, j| {
        (counter_u64(seed, (i * width + j) as u64) >> 56) as u8
    })
}

/// Nearly flat image: `FLAT_LEVEL` plus noise in `{-1, 0, +1}`.
pub fn flatish_image(width: usize, height: usize, seed: u64) -> GrayImage {
    GrayImage::from_fn(width, height, |i, j| {
        let r = counter_u64(seed, (i * width + j) as u64) % 3;
        FLAT_LEVEL - 1 + r as u8
    })
}

/// Left half constant at [`FLAT_LEVEL`], right half uniform noise.
///
/// Columns `0..width / 2` form the flat half.
pub fn half_flat_composite(width: usize, height: usize, seed: u64) -> GrayImage {
    let noise = noise_image(width, height, seed);
    GrayImage::from_fn(width, height, |i, j| {
        if in_flat_half(j, width) {
            FLAT_LEVEL
        } else {
            noise.get(i, j)
        }
    })
}

#[inline]
pub fn in_flat_half(col: usize, width: usize) -> bool {
    col < width / 2
}
