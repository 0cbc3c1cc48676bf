//! Deterministic parallel reductions.
//!
//! Sums split the index range in halves recursively, so the floating-point
//! association is fixed by the range length alone. Results are bit-identical
//! for any thread count.

use std::ops::Range;

const LEAF: usize = 256;
const PARALLEL_MIN: usize = 1 << 14;

/// Pairwise sum of `term(i)` over `range`.
pub fn tree_sum<F>(range: Range<usize>, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = range.end.saturating_sub(range.start);
    if len <= LEAF {
        let mut acc = 0.0;
        for i in range {
            acc += term(i);
        }
        return acc;
    }
    let mid = range.start + len / 2;
    let (lo, hi) = if len >= PARALLEL_MIN {
        rayon::join(
            || tree_sum(range.start..mid, term),
            || tree_sum(mid..range.end, term),
        )
    } else {
        (
            tree_sum(range.start..mid, term),
            tree_sum(mid..range.end, term),
        )
    };
    lo + hi
}

/// Pairwise sum of a slice.
pub fn sum_slice(values: &[f64]) -> f64 {
    tree_sum(0..values.len(), &|i| values[i])
}

/// Maximum of `term(i)`; `f64::NEG_INFINITY` on an empty range.
pub fn tree_max<F>(range: Range<usize>, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = range.end.saturating_sub(range.start);
    if len <= LEAF {
        return range.map(term).fold(f64::NEG_INFINITY, f64::max);
    }
    let mid = range.start + len / 2;
    let (lo, hi) = rayon::join(
        || tree_max(range.start..mid, term),
        || tree_max(mid..range.end, term),
    );
    lo.max(hi)
}
