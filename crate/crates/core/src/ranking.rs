//! Unique integer ranks for numeric columns.
//!
//! Ranks run from 1 to n with no repeats. Ties are broken according to a
//! [`TieBreakPolicy`]; the average-rank transform used by Spearman
//! correlation lives in [`crate::stats`] and is deliberately separate.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::types::{NumericMatrix, RankMatrix, TieBreakPolicy};

/// Ranks a single column.
pub fn rank_column(values: &[f64], policy: TieBreakPolicy) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(Error::invalid("cannot rank an empty column"));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite value {} at position {i}",
            values[i]
        )));
    }

    // Stable sort keeps tied values in index order.
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0; values.len()];
    match policy {
        TieBreakPolicy::FirstOccurrence => {
            for (slot, &idx) in order.iter().enumerate() {
                ranks[idx] = slot + 1;
            }
        }
        TieBreakPolicy::SeededRandom(seed) => {
            let mut rng = rng_from_seed(seed);
            let mut start = 0;
            while start < order.len() {
                let value = values[order[start]];
                let end = start
                    + order[start..]
                        .iter()
                        .take_while(|&&i| values[i] == value)
                        .count();
                let mut slots: Vec<usize> = (start + 1..=end).collect();
                if slots.len() > 1 {
                    slots.shuffle(&mut rng);
                }
                for (&idx, slot) in order[start..end].iter().zip(slots) {
                    ranks[idx] = slot;
                }
                start = end;
            }
        }
    }
    Ok(ranks)
}

/// Ranks every column of `data`. Under [`TieBreakPolicy::SeededRandom`] each
/// column uses its own sub-seed derived from the policy seed and the column
/// index.
pub fn rank_matrix(data: &NumericMatrix, policy: TieBreakPolicy) -> Result<RankMatrix> {
    let columns = (0..data.p())
        .map(|j| {
            let column_policy = match policy {
                TieBreakPolicy::FirstOccurrence => TieBreakPolicy::FirstOccurrence,
                TieBreakPolicy::SeededRandom(seed) => {
                    TieBreakPolicy::SeededRandom(derive_seed(seed, j as u64))
                }
            };
            rank_column(&data.column(j), column_policy)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankMatrix::from_columns_unchecked(columns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::check_permutation;
    use proptest::prelude::*;

    const FIRST: TieBreakPolicy = TieBreakPolicy::FirstOccurrence;

    #[test]
    fn spec_examples() {
        assert_eq!(rank_column(&[10.0, 20.0, 30.0], FIRST).unwrap(), vec![1, 2, 3]);
        assert_eq!(rank_column(&[3.0, 1.0, 2.0], FIRST).unwrap(), vec![3, 1, 2]);
        assert_eq!(rank_column(&[5.0, 5.0, 7.0], FIRST).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(rank_column(&[], FIRST), Err(Error::InvalidInput(_))));
        assert!(matches!(
            rank_column(&[1.0, f64::NAN], FIRST),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            rank_column(&[f64::NEG_INFINITY], TieBreakPolicy::SeededRandom(1)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn matrix_examples() {
        let m = NumericMatrix::from_columns(&[vec![2.5, 1.0, 3.0]]).unwrap();
        assert_eq!(rank_matrix(&m, FIRST).unwrap().column(0), &[2, 1, 3]);

        let ranked: Vec<f64> = (1..=9).map(f64::from).collect();
        let m = NumericMatrix::from_columns(&[ranked]).unwrap();
        assert_eq!(
            rank_matrix(&m, FIRST).unwrap().column(0),
            (1..=9).collect::<Vec<_>>().as_slice()
        );

        let col = vec![4.0, 4.0, 1.0, 9.0, 4.0];
        let m = NumericMatrix::from_columns(&[col.clone(), col]).unwrap();
        let r = rank_matrix(&m, FIRST).unwrap();
        assert_eq!(r.column(0), r.column(1));
        assert_eq!(r.column(0), &[2, 3, 1, 5, 4]);
    }

    #[test]
    fn random_policy_shuffles_only_within_ties() {
        let values = vec![1.0; 50];
        let a = rank_column(&values, TieBreakPolicy::SeededRandom(11)).unwrap();
        let b = rank_column(&values, TieBreakPolicy::SeededRandom(12)).unwrap();
        assert_ne!(a, b);
        assert_ne!(a, (1..=50).collect::<Vec<_>>());

        let values = [3.0, 1.0, 3.0, 2.0, 3.0];
        let r = rank_column(&values, TieBreakPolicy::SeededRandom(5)).unwrap();
        assert_eq!(r[1], 1);
        assert_eq!(r[3], 2);
        let mut tied = vec![r[0], r[2], r[4]];
        tied.sort_unstable();
        assert_eq!(tied, vec![3, 4, 5]);
    }

    #[test]
    fn random_policy_varies_by_column() {
        let col = vec![0.0; 20];
        let m = NumericMatrix::from_columns(&[col.clone(), col]).unwrap();
        let r = rank_matrix(&m, TieBreakPolicy::SeededRandom(3)).unwrap();
        assert_ne!(r.column(0), r.column(1));
    }

    fn policy() -> impl Strategy<Value = TieBreakPolicy> {
        prop_oneof![
            Just(TieBreakPolicy::FirstOccurrence),
            any::<u64>().prop_map(TieBreakPolicy::SeededRandom),
        ]
    }

    proptest! {
        // Small integer range forces plenty of ties.
        #[test]
        fn ranks_are_monotone_permutations(
            values in prop::collection::vec((-5i32..5).prop_map(f64::from), 1..60),
            policy in policy(),
        ) {
            let r = rank_column(&values, policy).unwrap();
            prop_assert!(check_permutation(&r).is_ok());
            for i in 0..values.len() {
                for k in 0..values.len() {
                    if values[i] < values[k] {
                        prop_assert!(r[i] < r[k]);
                    }
                }
            }
            prop_assert_eq!(rank_column(&values, policy).unwrap(), r);
        }

        #[test]
        fn first_occurrence_orders_ties_by_index(
            values in prop::collection::vec((0i32..3).prop_map(f64::from), 1..40),
        ) {
            let r = rank_column(&values, FIRST).unwrap();
            for i in 0..values.len() {
                for k in i + 1..values.len() {
                    if values[i] == values[k] {
                        prop_assert!(r[i] < r[k]);
                    }
                }
            }
        }
    }
}
