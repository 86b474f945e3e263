//! Parameter sweeps: mask the original data once per grid value, score every
//! masked copy, and correlate the metric series with the grid and with each
//! other.
//!
//! Grid points and replications run on the current rayon pool. Each one is
//! seeded from `(seed, index)` and results are assembled in index order, so
//! output does not depend on the number of worker threads.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{full_report, Metric};
use crate::perturb;
use crate::seed::{derive_seed, rng_from_seed};
use crate::stats::spearman;
use crate::types::{
    validate_parameter, Correlation, ExperimentResult, Method, NumericMatrix, PerturbationSpec,
    TieBreakPolicy,
};

/// An ordered list of parameter values for one masking method.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub method: Method,
    pub values: Vec<f64>,
}

impl GridSpec {
    pub fn new(method: Method, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("grid must contain at least one value"));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "grid values must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        for &v in &values {
            validate_parameter(method, v, None)?;
        }
        Ok(Self { method, values })
    }

    /// `from, from + step, …` up to and including `to` (within rounding).
    pub fn range(method: Method, from: f64, to: f64, step: f64) -> Result<Self> {
        if step.is_nan() || step <= 0.0 || !from.is_finite() || !to.is_finite() || to < from {
            return Err(Error::invalid(format!(
                "grid range needs from <= to and step > 0, got {from}..{to} step {step}"
            )));
        }
        let count = ((to - from) / step + 1e-9).floor() as usize + 1;
        let values = (0..count)
            .map(|i| round_decimal(from + i as f64 * step))
            .collect();
        Self::new(method, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Strips accumulated binary noise from decimal grid steps (0.1 + 0.2 → 0.3).
fn round_decimal(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if (r - x).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// The sweep used for each method: group sizes 1..=30, noise percentages
/// 1..=300, swap fractions 0.001..=0.3.
pub fn default_grid(method: Method) -> GridSpec {
    let values = match method {
        Method::Mdav => (1..=30).map(f64::from).collect(),
        Method::NoiseIndependent | Method::NoiseCorrelated => (1..=300).map(f64::from).collect(),
        Method::RankSwap => (1..=300).map(|i| f64::from(i) / 1000.0).collect(),
    };
    GridSpec { method, values }
}

fn correlation(a: &[f64], b: &[f64]) -> Result<Correlation> {
    match spearman(a, b) {
        Ok(r) => Ok(Some(r)),
        Err(Error::DegenerateInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Evaluates every grid point and the metric-vs-grid Spearman correlations.
pub fn run_grid(
    data: &NumericMatrix,
    grid: &GridSpec,
    seed: u64,
    policy: TieBreakPolicy,
) -> Result<ExperimentResult> {
    if data.n() < 2 {
        return Err(Error::degenerate(format!(
            "experiments need at least two records, got {}",
            data.n()
        )));
    }
    let outcomes: Vec<_> = grid
        .values
        .par_iter()
        .enumerate()
        .map(|(idx, &value)| {
            let spec = PerturbationSpec::new(grid.method, value, derive_seed(seed, idx as u64));
            perturb::apply(data, &spec)
                .and_then(|masked| full_report(data, &masked, policy))
                .map_err(|e| Error::GridPoint {
                    value,
                    source: Box::new(e),
                })
        })
        .collect();
    let reports = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut result = ExperimentResult {
        method: grid.method,
        seed,
        grid: grid.values.clone(),
        reports,
        spearman_vs_grid: BTreeMap::new(),
        spearman_cross: BTreeMap::new(),
    };
    for metric in Metric::HEADLINE {
        let r = if result.grid.len() < 2 {
            None
        } else {
            correlation(&result.grid, &result.series(metric))?
        };
        result.spearman_vs_grid.insert(metric, r);
    }
    result.spearman_cross = cross_metric_correlations(&result)?;
    Ok(result)
}

/// Spearman correlation of each bounded metric series against each unbounded
/// one. A constant series gives `None` for its pairs.
pub fn cross_metric_correlations(
    result: &ExperimentResult,
) -> Result<BTreeMap<(Metric, Metric), Correlation>> {
    let mut out = BTreeMap::new();
    for bounded in Metric::BOUNDED {
        for unbounded in Metric::UNBOUNDED {
            let r = if result.reports.len() < 2 {
                None
            } else {
                correlation(&result.series(bounded), &result.series(unbounded))?
            };
            out.insert((bounded, unbounded), r);
        }
    }
    Ok(out)
}

/// Repeated sweeps of a stochastic method.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub method: Method,
    pub base_seed: u64,
    pub replication_count: usize,
    pub per_replication: Vec<ExperimentResult>,
    /// Metric-vs-grid Spearman values, one per replication.
    pub correlation_distributions: BTreeMap<Metric, Vec<Correlation>>,
}

/// Runs `replication_count` independent sweeps, seeding replication `r` with
/// `derive_seed(base_seed, r)`.
pub fn replicate(
    data: &NumericMatrix,
    grid: &GridSpec,
    replication_count: usize,
    base_seed: u64,
    policy: TieBreakPolicy,
) -> Result<ReplicationSummary> {
    if !grid.method.is_stochastic() {
        return Err(Error::invalid(format!(
            "{} is deterministic; replication rejected",
            grid.method
        )));
    }
    if replication_count < 1 {
        return Err(Error::invalid("replication count must be at least 1"));
    }
    let runs: Vec<_> = (0..replication_count)
        .into_par_iter()
        .map(|r| run_grid(data, grid, derive_seed(base_seed, r as u64), policy))
        .collect();
    let per_replication = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let correlation_distributions = Metric::HEADLINE
        .into_iter()
        .map(|m| {
            let values = per_replication
                .iter()
                .map(|run| run.spearman_vs_grid[&m])
                .collect();
            (m, values)
        })
        .collect();
    Ok(ReplicationSummary {
        method: grid.method,
        base_seed,
        replication_count,
        per_replication,
        correlation_distributions,
    })
}

/// Positive, moderately correlated Gaussian test data: column `j` has mean
/// `50 + 25j` and standard deviation `5 + 2.5j`, with a common factor giving
/// pairwise correlation 0.36.
pub fn synthetic_gaussian(n: usize, p: usize, seed: u64) -> Result<NumericMatrix> {
    const LOADING: f64 = 0.6;
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(n * p);
    for _ in 0..n {
        let factor: f64 = rng.sample(StandardNormal);
        for j in 0..p {
            let own: f64 = rng.sample(StandardNormal);
            let z = LOADING * factor + (1.0 - LOADING * LOADING).sqrt() * own;
            values.push(50.0 + 25.0 * j as f64 + (5.0 + 2.5 * j as f64) * z);
        }
    }
    NumericMatrix::new(n, p, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricReport;

    fn small_data() -> NumericMatrix {
        synthetic_gaussian(40, 3, 17).unwrap()
    }

    #[test]
    fn default_grids() {
        let g = default_grid(Method::Mdav);
        assert_eq!(g.len(), 30);
        assert_eq!(g.values[0], 1.0);
        assert_eq!(*g.values.last().unwrap(), 30.0);
        assert_eq!(default_grid(Method::NoiseCorrelated).len(), 300);
        assert_eq!(default_grid(Method::NoiseIndependent).values[299], 300.0);
        let r = default_grid(Method::RankSwap);
        assert_eq!(r.len(), 300);
        assert_eq!(r.values[0], 0.001);
        assert_eq!(r.values[299], 0.3);
        for m in Method::ALL {
            let g = default_grid(m);
            assert_eq!(GridSpec::new(m, g.values.clone()).unwrap(), g);
        }
    }

    #[test]
    fn grid_validation_and_ranges() {
        assert!(GridSpec::new(Method::Mdav, vec![1.0, 1.0]).is_err());
        assert!(GridSpec::new(Method::Mdav, vec![2.0, 1.0]).is_err());
        assert!(GridSpec::new(Method::Mdav, vec![]).is_err());
        assert!(GridSpec::new(Method::RankSwap, vec![0.5, 1.5]).is_err());
        let g = GridSpec::range(Method::RankSwap, 0.001, 0.3, 0.001).unwrap();
        assert_eq!(g.values, default_grid(Method::RankSwap).values);
        let g = GridSpec::range(Method::NoiseIndependent, 5.0, 50.0, 5.0).unwrap();
        assert_eq!(g.values, (1..=10).map(|i| 5.0 * f64::from(i)).collect::<Vec<_>>());
        assert!(GridSpec::range(Method::Mdav, 1.0, 5.0, 0.0).is_err());
        assert!(GridSpec::range(Method::Mdav, 5.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mdav_first_row_is_all_zero() {
        let d = small_data();
        let grid = GridSpec::new(Method::Mdav, vec![1.0, 2.0, 3.0, 5.0]).unwrap();
        let res = run_grid(&d, &grid, 0, TieBreakPolicy::FirstOccurrence).unwrap();
        assert_eq!(res.reports.len(), 4);
        assert_eq!(res.reports[0], MetricReport::default());
        assert!(res.reports[1..].iter().all(|r| r.mae > 0.0 && r.brmae > 0.0));
    }

    #[test]
    fn one_record_fails_before_running() {
        let d = NumericMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let grid = default_grid(Method::Mdav);
        assert!(matches!(
            run_grid(&d, &grid, 0, TieBreakPolicy::FirstOccurrence),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn grid_point_errors_name_the_value() {
        let d = small_data();
        let grid = GridSpec::new(Method::Mdav, vec![1.0, 41.0, 50.0]).unwrap();
        match run_grid(&d, &grid, 0, TieBreakPolicy::FirstOccurrence) {
            Err(Error::GridPoint { value, .. }) => assert_eq!(value, 41.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn noise_run_is_reproducible_and_trending() {
        let d = small_data();
        let grid = GridSpec::range(Method::NoiseIndependent, 10.0, 200.0, 10.0).unwrap();
        let a = run_grid(&d, &grid, 5, TieBreakPolicy::FirstOccurrence).unwrap();
        let b = run_grid(&d, &grid, 5, TieBreakPolicy::FirstOccurrence).unwrap();
        assert_eq!(a, b);
        for m in Metric::HEADLINE {
            let r = a.spearman_vs_grid[&m].unwrap();
            assert!(r > 0.0, "{m}: {r}");
        }
        assert_eq!(a.spearman_cross.len(), 8);
    }

    #[test]
    fn single_point_grid_has_undefined_correlations() {
        let d = small_data();
        let grid = GridSpec::new(Method::RankSwap, vec![0.1]).unwrap();
        let res = run_grid(&d, &grid, 1, TieBreakPolicy::FirstOccurrence).unwrap();
        assert!(res.spearman_vs_grid.values().all(Option::is_none));
        assert!(res.spearman_cross.values().all(Option::is_none));
    }

    #[test]
    fn cross_correlation_markers() {
        let d = small_data();
        let grid = GridSpec::new(Method::Mdav, vec![1.0, 2.0, 4.0]).unwrap();
        let mut res = run_grid(&d, &grid, 0, TieBreakPolicy::FirstOccurrence).unwrap();
        for (i, r) in res.reports.iter_mut().enumerate() {
            r.brmae = i as f64;
            r.mae = 10.0 * i as f64;
            r.il1 = 3.0;
        }
        let cross = cross_metric_correlations(&res).unwrap();
        assert_eq!(cross[&(Metric::Brmae, Metric::Mae)], Some(1.0));
        assert_eq!(cross[&(Metric::Brmae, Metric::Il1)], None);
    }

    #[test]
    fn replication_rules() {
        let d = small_data();
        let grid = GridSpec::range(Method::RankSwap, 0.05, 0.5, 0.05).unwrap();
        assert!(matches!(
            replicate(&d, &default_grid(Method::Mdav), 3, 0, TieBreakPolicy::FirstOccurrence),
            Err(Error::InvalidInput(_))
        ));
        let one = replicate(&d, &grid, 1, 8, TieBreakPolicy::FirstOccurrence).unwrap();
        let single = run_grid(&d, &grid, derive_seed(8, 0), TieBreakPolicy::FirstOccurrence).unwrap();
        assert_eq!(one.per_replication, vec![single.clone()]);
        for m in Metric::HEADLINE {
            assert_eq!(one.correlation_distributions[&m], vec![single.spearman_vs_grid[&m]]);
        }
        let a = replicate(&d, &grid, 4, 8, TieBreakPolicy::FirstOccurrence).unwrap();
        let b = replicate(&d, &grid, 4, 8, TieBreakPolicy::FirstOccurrence).unwrap();
        assert_eq!(a, b);
        assert!(a.correlation_distributions.values().all(|v| v.len() == 4));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let d = small_data();
        let grid = GridSpec::range(Method::NoiseCorrelated, 5.0, 100.0, 5.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| replicate(&d, &grid, 3, 99, TieBreakPolicy::SeededRandom(4)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
