//! Deterministic reductions.

/// Below this length a block is summed left to right.
const BLOCK: usize = 64;
/// Above this length the two halves are reduced on separate threads.
const PARALLEL_SPLIT: usize = 1 << 15;

/// Pairwise sum of `f(k)` for `k` in `0..n`.
///
/// The reduction tree depends only on `n`: ranges are split at the
/// midpoint until at most 64 terms remain, and each leaf is summed in
/// index order. The result is therefore identical across runs and thread
/// counts.
pub fn pairwise_sum<F>(n: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_range(0, n, f)
}

fn sum_range<F>(start: usize, end: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = end - start;
    if len <= BLOCK {
        let mut acc = 0.0;
        for k in start..end {
            acc += f(k);
        }
        return acc;
    }
    let mid = start + len / 2;
    let (a, b) = if len > PARALLEL_SPLIT {
        rayon::join(|| sum_range(start, mid, f), || sum_range(mid, end, f))
    } else {
        (sum_range(start, mid, f), sum_range(mid, end, f))
    };
    a + b
}

/// `ln Σ exp(x_k)` over the given natural-log terms; `-inf` when empty or
/// when every term is `-inf`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let scaled = pairwise_sum(terms.len(), &|k| (terms[k] - max).exp());
    max + scaled.ln()
}
