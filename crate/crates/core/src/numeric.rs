//! Floating-point accumulation helpers.

/// Inputs longer than this are summed pairwise instead of left to right.
pub const PAIRWISE_THRESHOLD: usize = 10_000;

const PAIRWISE_BLOCK: usize = 128;

/// Sum of `values`. Plain left-to-right for short slices, pairwise (tree)
/// summation above [`PAIRWISE_THRESHOLD`] so rounding error grows with
/// `log n` instead of `n`.
pub fn sum(values: &[f64]) -> f64 {
    if values.len() > PAIRWISE_THRESHOLD {
        pairwise_sum(values)
    } else {
        values.iter().sum()
    }
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `p * log2(1/p)`, with the continuity convention `0 * log2(1/0) = 0`.
#[inline]
pub fn surprisal_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}
