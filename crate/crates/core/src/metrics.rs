//! Information-loss metrics between an original and a masked matrix.
//!
//! The raw-value metrics (MAE, MSE, IL1, IL1s) are unbounded. The rank
//! metrics compare column-wise rank matrices; dividing their sums by the
//! largest attainable displacement (see [`crate::rank_distance`]) yields
//! brMAE and brMSE in `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rank_distance::{abs_sum, bounds_for, sq_sum};
use crate::ranking::rank_matrix;
use crate::sum::{self, CompensatedSum};
use crate::types::{NumericMatrix, RankMatrix, TieBreakPolicy};

/// Cells whose original magnitude is below this are left out of IL1.
pub const IL1_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Brmae,
    Brmse,
    Mae,
    Mse,
    Il1,
    Il1s,
    Rmae,
    Rmse,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Brmae,
        Metric::Brmse,
        Metric::Mae,
        Metric::Mse,
        Metric::Il1,
        Metric::Il1s,
        Metric::Rmae,
        Metric::Rmse,
    ];

    /// The six metrics compared against the perturbation grid.
    pub const HEADLINE: [Metric; 6] = [
        Metric::Brmae,
        Metric::Brmse,
        Metric::Mae,
        Metric::Mse,
        Metric::Il1,
        Metric::Il1s,
    ];

    pub const BOUNDED: [Metric; 2] = [Metric::Brmae, Metric::Brmse];

    pub const UNBOUNDED: [Metric; 4] = [Metric::Mae, Metric::Mse, Metric::Il1, Metric::Il1s];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Brmae => "brmae",
            Metric::Brmse => "brmse",
            Metric::Mae => "mae",
            Metric::Mse => "mse",
            Metric::Il1 => "il1",
            Metric::Il1s => "il1s",
            Metric::Rmae => "rmae",
            Metric::Rmse => "rmse",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown metric '{s}'")))
    }
}

/// All eight metric values for one original/masked pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MetricReport {
    pub mae: f64,
    pub mse: f64,
    pub il1: f64,
    pub il1s: f64,
    pub brmae: f64,
    pub brmse: f64,
    pub rmae: f64,
    pub rmse: f64,
    pub il1_skipped_cells: usize,
}

impl MetricReport {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Mae => self.mae,
            Metric::Mse => self.mse,
            Metric::Il1 => self.il1,
            Metric::Il1s => self.il1s,
            Metric::Brmae => self.brmae,
            Metric::Brmse => self.brmse,
            Metric::Rmae => self.rmae,
            Metric::Rmse => self.rmse,
        }
    }
}

/// IL1 value together with the number of cells excluded for a near-zero
/// original value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Il1 {
    pub value: f64,
    pub skipped: usize,
}

fn cell_mean(
    original: &NumericMatrix,
    masked: &NumericMatrix,
    f: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    original.ensure_same_shape(masked)?;
    let total = sum::sum(
        original
            .values()
            .iter()
            .zip(masked.values())
            .map(|(&x, &y)| f(x, y)),
    );
    Ok(total / original.values().len() as f64)
}

/// Mean absolute error over all `n · p` cells.
pub fn mae(original: &NumericMatrix, masked: &NumericMatrix) -> Result<f64> {
    cell_mean(original, masked, |x, y| (x - y).abs())
}

/// Mean squared error over all `n · p` cells.
pub fn mse(original: &NumericMatrix, masked: &NumericMatrix) -> Result<f64> {
    cell_mean(original, masked, |x, y| (x - y) * (x - y))
}

/// Mean relative variation `|x − x̃| / |x|`.
pub fn il1(original: &NumericMatrix, masked: &NumericMatrix) -> Result<Il1> {
    original.ensure_same_shape(masked)?;
    let mut acc = CompensatedSum::default();
    let mut skipped = 0;
    for (&x, &y) in original.values().iter().zip(masked.values()) {
        if x.abs() < IL1_EPSILON {
            skipped += 1;
        } else {
            acc.add((x - y).abs() / x.abs());
        }
    }
    let included = original.values().len() - skipped;
    if included == 0 {
        return Err(Error::degenerate(
            "every original value is zero; IL1 is undefined",
        ));
    }
    Ok(Il1 {
        value: acc.total() / included as f64,
        skipped,
    })
}

/// Mean of `|x − x̃| / (√2 · S_j)`, with `S_j` the sample standard deviation
/// of original column `j`.
pub fn il1s(original: &NumericMatrix, masked: &NumericMatrix) -> Result<f64> {
    original.ensure_same_shape(masked)?;
    let (n, p) = original.shape();
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let col = original.column(j);
        if n < 2 || col.iter().all(|&v| v == col[0]) {
            return Err(Error::DegenerateColumn {
                column: j,
                reason: "original column is constant; IL1s is undefined".into(),
            });
        }
        scales.push(std::f64::consts::SQRT_2 * sum::sample_variance(&col).sqrt());
    }
    let total = sum::sum(
        original
            .values()
            .iter()
            .zip(masked.values())
            .enumerate()
            .map(|(idx, (&x, &y))| (x - y).abs() / scales[idx % p]),
    );
    Ok(total / (n * p) as f64)
}

fn ensure_same_ranks_shape(a: &RankMatrix, b: &RankMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        let (an, ap) = a.shape();
        let (bn, bp) = b.shape();
        return Err(Error::invalid(format!(
            "shape mismatch: original ranks are {an}x{ap}, masked ranks are {bn}x{bp}"
        )));
    }
    Ok(())
}

fn total_abs(a: &RankMatrix, b: &RankMatrix) -> Result<u128> {
    ensure_same_ranks_shape(a, b)?;
    Ok(a.columns()
        .iter()
        .zip(b.columns())
        .map(|(x, y)| abs_sum(x, y) as u128)
        .sum())
}

fn total_sq(a: &RankMatrix, b: &RankMatrix) -> Result<u128> {
    ensure_same_ranks_shape(a, b)?;
    Ok(a.columns()
        .iter()
        .zip(b.columns())
        .map(|(x, y)| sq_sum(x, y) as u128)
        .sum())
}

/// Rank-based MAE: mean absolute rank displacement over `n · p` cells.
pub fn rmae(original: &RankMatrix, masked: &RankMatrix) -> Result<f64> {
    let cells = (original.n() * original.p()) as f64;
    Ok(total_abs(original, masked)? as f64 / cells)
}

/// Rank-based MSE: mean squared rank displacement over `n · p` cells.
pub fn rmse(original: &RankMatrix, masked: &RankMatrix) -> Result<f64> {
    let cells = (original.n() * original.p()) as f64;
    Ok(total_sq(original, masked)? as f64 / cells)
}

fn bounded_denominator(ranks: &RankMatrix, squared: bool) -> Result<u128> {
    if ranks.n() < 2 {
        return Err(Error::degenerate(
            "bounded rank metrics need at least two records",
        ));
    }
    let bounds = bounds_for(ranks.n())?;
    let per_column = if squared { bounds.max_sq } else { bounds.max_abs };
    Ok(per_column as u128 * ranks.p() as u128)
}

/// Bounded rank MAE: total absolute rank displacement over its maximum `p · ⌊n²/2⌋`.
pub fn brmae(original: &RankMatrix, masked: &RankMatrix) -> Result<f64> {
    let numerator = total_abs(original, masked)?;
    Ok(numerator as f64 / bounded_denominator(original, false)? as f64)
}

/// Bounded rank MSE: total squared rank displacement over its maximum `p · n(n²−1)/3`.
pub fn brmse(original: &RankMatrix, masked: &RankMatrix) -> Result<f64> {
    let numerator = total_sq(original, masked)?;
    Ok(numerator as f64 / bounded_denominator(original, true)? as f64)
}

/// Ranks both matrices once under `policy` and evaluates every metric.
pub fn full_report(
    original: &NumericMatrix,
    masked: &NumericMatrix,
    policy: TieBreakPolicy,
) -> Result<MetricReport> {
    original.ensure_same_shape(masked)?;
    let original_ranks = rank_matrix(original, policy)?;
    let masked_ranks = rank_matrix(masked, policy)?;
    let il1 = il1(original, masked)?;
    Ok(MetricReport {
        mae: mae(original, masked)?,
        mse: mse(original, masked)?,
        il1: il1.value,
        il1s: il1s(original, masked)?,
        brmae: brmae(&original_ranks, &masked_ranks)?,
        brmse: brmse(&original_ranks, &masked_ranks)?,
        rmae: rmae(&original_ranks, &masked_ranks)?,
        rmse: rmse(&original_ranks, &masked_ranks)?,
        il1_skipped_cells: il1.skipped,
    })
}
