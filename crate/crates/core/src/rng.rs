//! Counter-based uniform generator used by the embedding simulator.
//!
//! Draw `k` of stream `seed` is the SplitMix64 finalizer applied to
//! `seed + (k + 1) * 0x9E3779B97F4A7C15` (wrapping), i.e. the `k`-th output
//! of a SplitMix64 generator seeded with `seed`. Any draw can be computed
//! without the ones before it, so sampling is independent of visit order
//! and thread schedule.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th 64-bit output of the stream keyed by `seed`.
#[inline]
pub fn counter_u64(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Uniform double in `[0, 1)` built from the top 53 bits of the draw.
#[inline]
pub fn counter_uniform(seed: u64, index: u64) -> f64 {
    (counter_u64(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
