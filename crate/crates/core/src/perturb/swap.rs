//! Rank swapping.
//!
//! Each column is handled on its own: records are sorted by value (ties by
//! index), then walked in ascending rank order. Every record not yet swapped
//! exchanges its value with a uniformly chosen, not yet swapped record at
//! most `w = ⌊P · n⌋` ranks above it. The column's multiset of values is
//! unchanged and no value moves more than `w` ranks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::types::NumericMatrix;

/// Swap window `⌊fraction · n⌋`. The tiny offset keeps decimal grid values
/// such as `0.3 · 1000` from flooring one below the intended integer.
pub fn swap_window(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64 + 1e-9).floor() as usize).min(n.saturating_sub(1))
}

fn swap_column(values: &[f64], window: usize, seed: u64) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut out = values.to_vec();
    if window == 0 {
        return out;
    }
    let mut rng = rng_from_seed(seed);
    let mut swapped = vec![false; n];
    let mut candidates = Vec::with_capacity(window);
    for pos in 0..n {
        if swapped[pos] {
            continue;
        }
        swapped[pos] = true;
        candidates.clear();
        candidates.extend((pos + 1..n.min(pos + window + 1)).filter(|&q| !swapped[q]));
        if candidates.is_empty() {
            continue;
        }
        let q = candidates[rng.random_range(0..candidates.len())];
        swapped[q] = true;
        let (a, b) = (order[pos], order[q]);
        out[a] = values[b];
        out[b] = values[a];
    }
    out
}

/// Rank-swaps every column of `data` with window fraction `p_fraction`.
pub fn rank_swap(data: &NumericMatrix, p_fraction: f64, seed: u64) -> Result<NumericMatrix> {
    if !(0.0..=1.0).contains(&p_fraction) {
        return Err(Error::invalid(format!(
            "rank swap fraction must lie in [0, 1], got {p_fraction}"
        )));
    }
    let window = swap_window(p_fraction, data.n());
    let columns: Vec<Vec<f64>> = (0..data.p())
        .map(|j| swap_column(&data.column(j), window, derive_seed(seed, j as u64)))
        .collect();
    data.replace_columns(&columns)
}
