//! Distances between rank vectors and their attainable maxima.
//!
//! For two permutations of `1..=n` the absolute and squared displacement
//! sums are maximised by a vector against its reversal. Pairing the i-th
//! entry from each end gives `K = ⌊n/2⌋` mirrored differences `n − 2k + 1`,
//! each counted twice:
//!
//! ```text
//! max_abs = 2 · Σ_{k=1..K} (n − 2k + 1)   = ⌊n²/2⌋
//! max_sq  = 2 · Σ_{k=1..K} (n − 2k + 1)²  = n(n² − 1)/3
//! ```
//!
//! All sums are exact integers; the only floating-point step is the final
//! division in the bounded variants.

use crate::error::{Error, Result};
use crate::types::{check_permutation, RankDistanceBounds};

/// Largest vector length whose `max_sq` fits in an `i64`.
pub const MAX_RANK_LENGTH: usize = 3_000_000;

/// `max_abs` and `max_sq` evaluated term by term from the mirrored-pair sums.
pub fn summation_bounds(n: usize) -> (u64, u64) {
    let n = n as u64;
    let (mut abs, mut sq) = (0u64, 0u64);
    for k in 1..=n / 2 {
        let d = n - 2 * k + 1;
        abs += 2 * d;
        sq += 2 * d * d;
    }
    (abs, sq)
}

pub fn max_abs_closed_form(n: usize) -> u64 {
    let n = n as u128;
    (n * n / 2) as u64
}

pub fn max_sq_closed_form(n: usize) -> u64 {
    let n = n as u128;
    if n == 0 {
        return 0;
    }
    (n * (n * n - 1) / 3) as u64
}

/// Maximal rank distances for vectors of length `n`.
///
/// Both the summation and the closed form are evaluated; they must agree.
pub fn bounds_for(n: usize) -> Result<RankDistanceBounds> {
    if n == 0 {
        return Err(Error::invalid("rank vector length must be at least 1"));
    }
    if n > MAX_RANK_LENGTH {
        return Err(Error::Overflow(format!(
            "rank vector length {n} exceeds the supported maximum {MAX_RANK_LENGTH}"
        )));
    }
    let (abs_sum, sq_sum) = summation_bounds(n);
    let (max_abs, max_sq) = (max_abs_closed_form(n), max_sq_closed_form(n));
    assert_eq!(abs_sum, max_abs, "absolute bound mismatch at n = {n}");
    assert_eq!(sq_sum, max_sq, "squared bound mismatch at n = {n}");
    Ok(RankDistanceBounds {
        n,
        half: n / 2,
        max_abs,
        max_sq,
    })
}

fn validate_pair(r1: &[usize], r2: &[usize]) -> Result<()> {
    if r1.len() != r2.len() {
        return Err(Error::invalid(format!(
            "rank vectors differ in length: {} vs {}",
            r1.len(),
            r2.len()
        )));
    }
    if r1.is_empty() {
        return Err(Error::invalid("rank vectors must be non-empty"));
    }
    if r1.len() > MAX_RANK_LENGTH {
        return Err(Error::Overflow(format!(
            "rank vector length {} exceeds the supported maximum {MAX_RANK_LENGTH}",
            r1.len()
        )));
    }
    check_permutation(r1).map_err(|e| Error::invalid(format!("first vector: {e}")))?;
    check_permutation(r2).map_err(|e| Error::invalid(format!("second vector: {e}")))?;
    Ok(())
}

pub(crate) fn abs_sum(r1: &[usize], r2: &[usize]) -> u64 {
    r1.iter().zip(r2).map(|(&a, &b)| a.abs_diff(b) as u64).sum()
}

pub(crate) fn sq_sum(r1: &[usize], r2: &[usize]) -> u64 {
    r1.iter()
        .zip(r2)
        .map(|(&a, &b)| {
            let d = a.abs_diff(b) as u64;
            d * d
        })
        .sum()
}

/// `Σ |r1ᵢ − r2ᵢ|` between two permutations of `1..=n`.
pub fn abs_rank_distance(r1: &[usize], r2: &[usize]) -> Result<u64> {
    validate_pair(r1, r2)?;
    Ok(abs_sum(r1, r2))
}

/// `Σ (r1ᵢ − r2ᵢ)²` between two permutations of `1..=n`.
pub fn sq_rank_distance(r1: &[usize], r2: &[usize]) -> Result<u64> {
    validate_pair(r1, r2)?;
    Ok(sq_sum(r1, r2))
}

fn nondegenerate_bounds(n: usize) -> Result<RankDistanceBounds> {
    if n < 2 {
        return Err(Error::degenerate(
            "bounded rank distance needs at least two records",
        ));
    }
    bounds_for(n)
}

/// Absolute rank distance divided by its maximum, in `[0, 1]`.
pub fn bounded_abs_rank_distance(r1: &[usize], r2: &[usize]) -> Result<f64> {
    validate_pair(r1, r2)?;
    let bounds = nondegenerate_bounds(r1.len())?;
    Ok(abs_sum(r1, r2) as f64 / bounds.max_abs as f64)
}

/// Squared rank distance divided by its maximum, in `[0, 1]`.
pub fn bounded_sq_rank_distance(r1: &[usize], r2: &[usize]) -> Result<f64> {
    validate_pair(r1, r2)?;
    let bounds = nondegenerate_bounds(r1.len())?;
    Ok(sq_sum(r1, r2) as f64 / bounds.max_sq as f64)
}
