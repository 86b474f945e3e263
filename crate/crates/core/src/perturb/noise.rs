//! Additive Gaussian noise, independent per column or correlated across
//! columns.
//!
//! The percentage scales the noise *variance*: independent noise on column
//! `j` has variance `(pct/100)·S_j²`; correlated noise rows have covariance
//! `(pct/100)·Σ̂`, with `Σ̂` the sample covariance of the original data.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::sum;
use crate::types::NumericMatrix;

/// Sample covariance matrix (`n − 1` denominator) of the columns of `data`.
pub fn sample_covariance(data: &NumericMatrix) -> Result<DMatrix<f64>> {
    let (n, p) = data.shape();
    if n < 2 {
        return Err(Error::degenerate("covariance needs at least two records"));
    }
    let centered: Vec<Vec<f64>> = data
        .columns()
        .into_iter()
        .map(|c| {
            let m = sum::mean(&c);
            c.into_iter().map(|v| v - m).collect()
        })
        .collect();
    let mut cov = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let c = sum::sum(centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y))
                / (n - 1) as f64;
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    Ok(cov)
}

/// Pivots below this fraction of the column variance count as rank deficient.
const PIVOT_TOLERANCE: f64 = 1e-10;

/// Lower Cholesky factor of `cov`, or the first column whose residual
/// variance (given the preceding columns) is numerically zero.
fn cholesky_factor(cov: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = cov.nrows();
    let degenerate = |column| Error::DegenerateColumn {
        column,
        reason: "sample covariance is not positive definite".into(),
    };
    let l = match cov.clone().cholesky() {
        Some(chol) => chol.l(),
        None => {
            let column = (1..=p)
                .find(|&m| cov.view((0, 0), (m, m)).into_owned().cholesky().is_none())
                .map_or(p - 1, |m| m - 1);
            return Err(degenerate(column));
        }
    };
    match (0..p).find(|&j| l[(j, j)] * l[(j, j)] <= PIVOT_TOLERANCE * cov[(j, j)]) {
        Some(j) => Err(degenerate(j)),
        None => Ok(l),
    }
}

/// Adds zero-mean Gaussian noise at `pct` percent of the data's variance.
pub fn add_noise(
    data: &NumericMatrix,
    pct: f64,
    correlated: bool,
    seed: u64,
) -> Result<NumericMatrix> {
    if !pct.is_finite() || pct < 0.0 {
        return Err(Error::invalid(format!(
            "noise percentage must be a finite value >= 0, got {pct}"
        )));
    }
    if pct == 0.0 {
        return Ok(data.clone());
    }
    let (n, p) = data.shape();
    if n < 2 {
        return Err(Error::degenerate(
            "noise addition needs at least two records to estimate variance",
        ));
    }
    let scale = pct / 100.0;

    if !correlated {
        let columns: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                let col = data.column(j);
                let sd = (scale * sum::sample_variance(&col)).sqrt();
                let mut rng = rng_from_seed(derive_seed(seed, j as u64));
                col.into_iter()
                    .map(|x| {
                        let z: f64 = rng.sample(StandardNormal);
                        x + sd * z
                    })
                    .collect()
            })
            .collect();
        return data.replace_columns(&columns);
    }

    let factor = cholesky_factor(sample_covariance(data)? * scale)?;
    let mut rng = rng_from_seed(seed);
    let mut values = data.values().to_vec();
    let mut z = DVector::zeros(p);
    for row in values.chunks_exact_mut(p) {
        for zj in z.iter_mut() {
            *zj = rng.sample(StandardNormal);
        }
        let eps = &factor * &z;
        for (x, e) in row.iter_mut().zip(eps.iter()) {
            *x += e;
        }
    }
    data.replace_values(values)
}
