//! Information-loss metrics for masked numeric microdata.
//!
//! Alongside the classical distance metrics (MAE, MSE, IL1, IL1s) the crate
//! provides brMAE and brMSE: rank displacement sums divided by their largest
//! attainable value, so they always fall in `[0, 1]`. It also ships the
//! masking methods needed to compare the two families (MDAV
//! microaggregation, additive noise, rank swapping) and a seeded harness
//! that sweeps parameter grids and reports Spearman correlations.
//!
//! ```
//! use rankloss::{metrics, NumericMatrix, TieBreakPolicy};
//!
//! let original = NumericMatrix::from_columns(&[vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
//! let masked = NumericMatrix::from_columns(&[vec![4.0, 3.0, 2.0, 1.0]]).unwrap();
//! let report = metrics::full_report(&original, &masked, TieBreakPolicy::FirstOccurrence).unwrap();
//! assert_eq!(report.brmae, 1.0);
//! assert_eq!(report.brmse, 1.0);
//! ```

pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod perturb;
pub mod rank_distance;
pub mod ranking;
pub mod seed;
pub mod stats;
mod sum;
pub mod types;

pub use error::{Error, Result};
pub use metrics::{Metric, MetricReport};
pub use types::{
    Correlation, ExperimentResult, Method, NumericMatrix, PerturbationSpec, RankDistanceBounds,
    RankMatrix, TieBreakPolicy,
};
