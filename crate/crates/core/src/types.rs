//! Shared data model: microdata matrices, rank matrices and the descriptors
//! that drive masking and experiments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricReport};

/// Dense `n × p` table of finite reals, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
    column_names: Option<Vec<String>>,
}

impl NumericMatrix {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::invalid(format!(
                "matrix must have at least one row and one column, got {n}x{p}"
            )));
        }
        if values.len() != n * p {
            return Err(Error::invalid(format!(
                "expected {} values for a {n}x{p} matrix, got {}",
                n * p,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value {} at row {}, column {}",
                values[pos],
                pos / p,
                pos % p
            )));
        }
        Ok(Self {
            n,
            p,
            values,
            column_names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::invalid(format!(
                "row {bad} has {} values, expected {p}",
                rows[bad].len()
            )));
        }
        Self::new(n, p, rows.concat())
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().position(|c| c.len() != n) {
            return Err(Error::invalid(format!(
                "column {bad} has {} values, expected {n}",
                columns[bad].len()
            )));
        }
        let mut values = Vec::with_capacity(n * p);
        for i in 0..n {
            values.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(n, p, values)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p {
            return Err(Error::invalid(format!(
                "{} column names for {} columns",
                names.len(),
                self.p
            )));
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.p + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.p..(row + 1) * self.p]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.values.iter().skip(col).step_by(self.p).copied().collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.p).map(|j| self.column(j)).collect()
    }

    /// Builds a matrix of the same shape (and column names) from new columns.
    pub(crate) fn replace_columns(&self, columns: &[Vec<f64>]) -> Result<Self> {
        let mut out = Self::from_columns(columns)?;
        if out.shape() != self.shape() {
            return Err(Error::invalid("replacement columns change the shape"));
        }
        out.column_names = self.column_names.clone();
        Ok(out)
    }

    pub(crate) fn replace_values(&self, values: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(self.n, self.p, values)?;
        out.column_names = self.column_names.clone();
        Ok(out)
    }

    pub(crate) fn ensure_same_shape(&self, other: &NumericMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::invalid(format!(
                "shape mismatch: original is {}x{}, masked is {}x{}",
                self.n, self.p, other.n, other.p
            )));
        }
        Ok(())
    }
}

/// Column-wise ranks; every column is a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    n: usize,
    columns: Vec<Vec<usize>>,
}

impl RankMatrix {
    pub fn from_columns(columns: Vec<Vec<usize>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::invalid("rank matrix must be non-empty"));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::invalid(format!(
                    "rank column {j} has length {}, expected {n}",
                    col.len()
                )));
            }
            check_permutation(col).map_err(|e| Error::invalid(format!("rank column {j}: {e}")))?;
        }
        Ok(Self { n, columns })
    }

    pub(crate) fn from_columns_unchecked(columns: Vec<Vec<usize>>) -> Self {
        debug_assert!(columns.iter().all(|c| check_permutation(c).is_ok()));
        Self {
            n: columns[0].len(),
            columns,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.columns.len())
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }
}

/// Checks that `ranks` is a permutation of `1..=ranks.len()`.
pub(crate) fn check_permutation(ranks: &[usize]) -> std::result::Result<(), String> {
    let n = ranks.len();
    let mut seen = vec![false; n];
    for (i, &r) in ranks.iter().enumerate() {
        if r == 0 || r > n {
            return Err(format!("rank {r} at position {i} outside 1..={n}"));
        }
        if std::mem::replace(&mut seen[r - 1], true) {
            return Err(format!("rank {r} repeated"));
        }
    }
    Ok(())
}

/// How tied values receive distinct ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreakPolicy {
    /// Tied values get increasing ranks in order of their original index.
    #[default]
    FirstOccurrence,
    /// Tied values get a seeded random assignment of their rank slots.
    SeededRandom(u64),
}

/// Maximal absolute and squared rank distances between two permutations of
/// length `n`, attained by a vector and its reversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankDistanceBounds {
    pub n: usize,
    /// Number of mirrored pairs, `⌊n/2⌋`.
    pub half: usize,
    pub max_abs: u64,
    pub max_sq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Mdav,
    NoiseIndependent,
    NoiseCorrelated,
    RankSwap,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Mdav,
        Method::NoiseIndependent,
        Method::NoiseCorrelated,
        Method::RankSwap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mdav => "mdav",
            Method::NoiseIndependent => "noise",
            Method::NoiseCorrelated => "noise-correlated",
            Method::RankSwap => "rankswap",
        }
    }

    pub fn is_stochastic(self) -> bool {
        !matches!(self, Method::Mdav)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mdav" | "microaggregation" => Ok(Method::Mdav),
            "noise" | "noise-independent" | "additive" => Ok(Method::NoiseIndependent),
            "noise-correlated" | "correlated-noise" | "correlated" => Ok(Method::NoiseCorrelated),
            "rankswap" | "rank-swap" | "rank_swap" => Ok(Method::RankSwap),
            other => Err(Error::invalid(format!("unknown perturbation method '{other}'"))),
        }
    }
}

/// A fully determined masking step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub method: Method,
    /// Aggregation size `k`, noise percentage, or swap fraction `P`.
    pub parameter: f64,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(method: Method, parameter: f64, seed: u64) -> Self {
        Self {
            method,
            parameter,
            seed,
        }
    }

    /// Checks the parameter against the method's domain for a dataset of `n` records.
    pub fn validate(&self, n: usize) -> Result<()> {
        validate_parameter(self.method, self.parameter, Some(n))
    }
}

impl fmt::Display for PerturbationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "method={} parameter={} seed={}",
            self.method, self.parameter, self.seed
        )
    }
}

pub(crate) fn validate_parameter(method: Method, value: f64, n: Option<usize>) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::invalid(format!("{method} parameter must be finite")));
    }
    match method {
        Method::Mdav => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::invalid(format!(
                    "mdav group size must be an integer >= 1, got {value}"
                )));
            }
            if let Some(n) = n {
                if value > n as f64 {
                    return Err(Error::invalid(format!(
                        "mdav group size {value} exceeds record count {n}"
                    )));
                }
            }
        }
        Method::NoiseIndependent | Method::NoiseCorrelated => {
            if value < 0.0 {
                return Err(Error::invalid(format!(
                    "noise percentage must be >= 0, got {value}"
                )));
            }
        }
        Method::RankSwap => {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::invalid(format!(
                    "rank swap fraction must lie in [0, 1], got {value}"
                )));
            }
        }
    }
    Ok(())
}

/// A Spearman value, or `None` when one of the series is constant.
pub type Correlation = Option<f64>;

/// Outcome of one sweep over a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub method: Method,
    pub seed: u64,
    pub grid: Vec<f64>,
    /// One report per evaluated grid point, in grid order.
    pub reports: Vec<MetricReport>,
    pub spearman_vs_grid: BTreeMap<Metric, Correlation>,
    pub spearman_cross: BTreeMap<(Metric, Metric), Correlation>,
}

impl ExperimentResult {
    /// The values of one metric across the grid.
    pub fn series(&self, metric: Metric) -> Vec<f64> {
        self.reports.iter().map(|r| r.get(metric)).collect()
    }
}
