//! Spearman correlation and the permutation-distance oracles.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rank_distance::{abs_sum, bounds_for, sq_sum};
use crate::seed::rng_from_seed;
use crate::sum;

/// Largest `n` accepted by [`enumerate_permutation_distances`] (8! = 40,320).
pub const MAX_ENUMERATION_N: usize = 8;

/// Average ranks (1-based); tied values share the mean of their rank slots.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let v = values[order[start]];
        let end = start + order[start..].iter().take_while(|&&i| values[i] == v).count();
        // Slots start+1 ..= end.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let mx = sum::mean(x);
    let my = sum::mean(y);
    let sxy = sum::sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = sum::sum(x.iter().map(|a| (a - mx) * (a - mx)));
    let syy = sum::sum(y.iter().map(|b| (b - my) * (b - my)));
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of the midranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "series differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::invalid("spearman needs at least two observations"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("spearman input contains non-finite values"));
    }
    if a.iter().all(|&v| v == a[0]) || b.iter().all(|&v| v == b[0]) {
        return Err(Error::degenerate("spearman is undefined for a constant series"));
    }
    pearson(&midranks(a), &midranks(b))
        .ok_or_else(|| Error::degenerate("spearman is undefined for a constant series"))
}

/// Distances of one permutation from the identity vector `(1, …, n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationDistanceRecord {
    pub permutation: Vec<usize>,
    pub abs_distance: u64,
    pub sq_distance: u64,
    pub bounded_abs: f64,
    pub bounded_sq: f64,
}

fn record_for(identity: &[usize], permutation: Vec<usize>, max_abs: u64, max_sq: u64) -> PermutationDistanceRecord {
    let abs_distance = abs_sum(identity, &permutation);
    let sq_distance = sq_sum(identity, &permutation);
    PermutationDistanceRecord {
        permutation,
        abs_distance,
        sq_distance,
        bounded_abs: abs_distance as f64 / max_abs as f64,
        bounded_sq: sq_distance as f64 / max_sq as f64,
    }
}

/// Every permutation of `1..=n`, in lexicographic order, with its distances
/// from the identity.
pub fn enumerate_permutation_distances(n: usize) -> Result<Vec<PermutationDistanceRecord>> {
    if !(2..=MAX_ENUMERATION_N).contains(&n) {
        return Err(Error::invalid(format!(
            "full enumeration supports 2 <= n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let bounds = bounds_for(n)?;
    let identity: Vec<usize> = (1..=n).collect();
    Ok((1..=n)
        .permutations(n)
        .map(|p| record_for(&identity, p, bounds.max_abs, bounds.max_sq))
        .collect())
}

/// `count` seeded uniform permutations of `1..=n`, followed by the identity
/// and the full reversal.
pub fn sample_permutation_distances(
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<PermutationDistanceRecord>> {
    if n < 2 {
        return Err(Error::invalid(format!("sampling needs n >= 2, got {n}")));
    }
    if count < 1 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let bounds = bounds_for(n)?;
    let identity: Vec<usize> = (1..=n).collect();
    let mut rng = rng_from_seed(seed);
    let mut records = Vec::with_capacity(count + 2);
    for _ in 0..count {
        let mut p = identity.clone();
        p.shuffle(&mut rng);
        records.push(record_for(&identity, p, bounds.max_abs, bounds.max_sq));
    }
    records.push(record_for(&identity, identity.clone(), bounds.max_abs, bounds.max_sq));
    records.push(record_for(
        &identity,
        identity.iter().rev().copied().collect(),
        bounds.max_abs,
        bounds.max_sq,
    ));
    Ok(records)
}

/// Number of distinct absolute and squared distances among `records`.
pub fn distinct_value_counts(records: &[PermutationDistanceRecord]) -> Result<(usize, usize)> {
    if records.is_empty() {
        return Err(Error::invalid("no permutation records"));
    }
    let abs: BTreeSet<u64> = records.iter().map(|r| r.abs_distance).collect();
    let sq: BTreeSet<u64> = records.iter().map(|r| r.sq_distance).collect();
    Ok((abs.len(), sq.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spearman_examples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman(&a, &a).unwrap(), 1.0);
        let rev = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert_eq!(spearman(&a, &rev).unwrap(), -1.0);
        let b = [2.0, 1.0, 4.0, 3.0, 5.0];
        assert!((spearman(&a, &b).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(spearman(&[1.0], &[2.0]), Err(Error::InvalidInput(_))));
        assert!(matches!(spearman(&[1.0, 2.0], &[2.0]), Err(Error::InvalidInput(_))));
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn spearman_with_ties_uses_midranks() {
        assert_eq!(midranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
        // Hand computation: ranks x = (1.5, 1.5, 3, 4), y = (1, 2, 3, 4).
        let r = spearman(&[1.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let expected = 4.5 / (4.5f64.sqrt() * 5.0f64.sqrt());
        assert!((r - expected).abs() < 1e-15);
    }

    #[test]
    fn n3_distance_multisets() {
        let recs = enumerate_permutation_distances(3).unwrap();
        assert_eq!(recs.len(), 6);
        let mut abs: Vec<u64> = recs.iter().map(|r| r.abs_distance).collect();
        let mut sq: Vec<u64> = recs.iter().map(|r| r.sq_distance).collect();
        abs.sort_unstable();
        sq.sort_unstable();
        assert_eq!(abs, vec![0, 2, 2, 4, 4, 4]);
        assert_eq!(sq, vec![0, 2, 2, 6, 6, 8]);
        assert_eq!(distinct_value_counts(&recs).unwrap(), (3, 4));
    }

    #[test]
    fn n4_maxima_and_distinct_counts() {
        let recs = enumerate_permutation_distances(4).unwrap();
        assert_eq!(recs.len(), 24);
        assert_eq!(recs.iter().filter(|r| r.abs_distance == 8).count(), 4);
        assert_eq!(recs.iter().filter(|r| r.sq_distance == 20).count(), 1);
        assert_eq!(distinct_value_counts(&recs).unwrap(), (5, 11));
    }

    #[test]
    fn enumeration_is_lexicographic_and_bounded() {
        for n in 2..=6 {
            let recs = enumerate_permutation_distances(n).unwrap();
            assert!(recs.windows(2).all(|w| w[0].permutation < w[1].permutation));
            assert_eq!(recs.iter().filter(|r| r.bounded_abs == 0.0).count(), 1);
            assert_eq!(recs.iter().filter(|r| r.bounded_sq == 0.0).count(), 1);
            assert!(recs
                .iter()
                .all(|r| (0.0..=1.0).contains(&r.bounded_abs) && (0.0..=1.0).contains(&r.bounded_sq)));
        }
        assert!(enumerate_permutation_distances(1).is_err());
        assert!(enumerate_permutation_distances(9).is_err());
    }

    #[test]
    fn sampling_includes_extremes_and_is_seeded() {
        let a = sample_permutation_distances(100, 50, 4).unwrap();
        assert_eq!(a.len(), 52);
        assert!(a.iter().any(|r| r.bounded_abs == 0.0));
        assert!(a.iter().any(|r| r.bounded_abs == 1.0 && r.bounded_sq == 1.0));
        assert_eq!(a, sample_permutation_distances(100, 50, 4).unwrap());
        assert_ne!(a, sample_permutation_distances(100, 50, 5).unwrap());
        assert!(sample_permutation_distances(1, 5, 0).is_err());
        assert!(sample_permutation_distances(5, 0, 0).is_err());
    }

    #[test]
    fn distinct_counts_edge_cases() {
        assert!(distinct_value_counts(&[]).is_err());
        let one = sample_permutation_distances(5, 1, 0).unwrap();
        assert_eq!(distinct_value_counts(&one[..1]).unwrap(), (1, 1));
    }

    proptest! {
        #[test]
        fn spearman_symmetric_and_rank_invariant(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40)
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            if let Ok(r) = spearman(&a, &b) {
                prop_assert!((-1.0..=1.0).contains(&r));
                prop_assert_eq!(r, spearman(&b, &a).unwrap());
                let t: Vec<f64> = a.iter().map(|v| v.exp().min(1e300) + v).collect();
                prop_assert!((spearman(&t, &b).unwrap() - r).abs() < 1e-12);
            }
        }
    }
}
