//! MDAV (maximum distance to average vector) microaggregation.
//!
//! While at least `2k` records remain: take the record `r` farthest from the
//! centroid of the remaining records and group it with its `k − 1` nearest
//! neighbours, then take the record `s` farthest from `r` and group it the
//! same way. A final remainder of `k..2k` records forms one group; a
//! remainder smaller than `k` joins the group whose centroid is nearest to
//! the remainder's centroid. Every record is then replaced by the mean of
//! its group.
//!
//! Distances are squared Euclidean on z-scored columns. Ties are resolved
//! towards the lower record index.

use crate::error::{Error, Result};
use crate::sum;
use crate::types::NumericMatrix;

/// Row-major standardized copy of the data. Constant columns become zero.
struct Standardized {
    p: usize,
    values: Vec<f64>,
}

impl Standardized {
    fn new(data: &NumericMatrix) -> Self {
        let (n, p) = data.shape();
        let mut values = vec![0.0; n * p];
        for j in 0..p {
            let col = data.column(j);
            let mean = sum::mean(&col);
            let sd = if n > 1 {
                sum::sample_variance(&col).sqrt()
            } else {
                0.0
            };
            if sd > 0.0 {
                for (i, v) in col.iter().enumerate() {
                    values[i * p + j] = (v - mean) / sd;
                }
            }
        }
        Self { p, values }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    fn centroid(&self, members: &[usize]) -> Vec<f64> {
        (0..self.p)
            .map(|j| sum::sum(members.iter().map(|&i| self.values[i * self.p + j])) / members.len() as f64)
            .collect()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index into `remaining` of the record farthest from `target`.
fn farthest(points: &Standardized, remaining: &[usize], target: &[f64]) -> usize {
    let mut best = 0;
    let mut best_dist = f64::NEG_INFINITY;
    for (pos, &i) in remaining.iter().enumerate() {
        let d = sq_dist(points.row(i), target);
        // `remaining` is ascending, so strict `>` keeps the lowest index on ties.
        if d > best_dist {
            best = pos;
            best_dist = d;
        }
    }
    best
}

/// Removes `remaining[seed_pos]` and its `k − 1` nearest neighbours from
/// `remaining` and returns them as a group.
fn take_group(
    points: &Standardized,
    remaining: &mut Vec<usize>,
    seed_pos: usize,
    k: usize,
) -> Vec<usize> {
    let seed = remaining[seed_pos];
    let origin = points.row(seed);
    let mut others: Vec<(f64, usize)> = remaining
        .iter()
        .filter(|&&i| i != seed)
        .map(|&i| (sq_dist(points.row(i), origin), i))
        .collect();
    let take = k - 1;
    if take > 0 && take < others.len() {
        others.select_nth_unstable_by(take - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }
    let mut group: Vec<usize> = std::iter::once(seed)
        .chain(others.iter().take(take).map(|&(_, i)| i))
        .collect();
    group.sort_unstable();
    remaining.retain(|i| group.binary_search(i).is_err());
    group
}

/// Partitions record indices into MDAV groups of size `k` (one group may be
/// larger, up to `2k − 1`).
pub(crate) fn mdav_groups(data: &NumericMatrix, k: usize) -> Vec<Vec<usize>> {
    let points = Standardized::new(data);
    let mut remaining: Vec<usize> = (0..data.n()).collect();
    let mut groups = Vec::with_capacity(data.n() / k + 1);

    while remaining.len() >= 2 * k {
        let centroid = points.centroid(&remaining);
        let r_pos = farthest(&points, &remaining, &centroid);
        let r = remaining[r_pos];
        groups.push(take_group(&points, &mut remaining, r_pos, k));
        let s_pos = farthest(&points, &remaining, points.row(r));
        groups.push(take_group(&points, &mut remaining, s_pos, k));
    }

    if remaining.len() >= k {
        groups.push(remaining);
    } else if !remaining.is_empty() {
        let leftover = points.centroid(&remaining);
        let target = groups
            .iter()
            .enumerate()
            .map(|(g, members)| (sq_dist(&points.centroid(members), &leftover), g))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, g)| g)
            .expect("a remainder smaller than k implies at least two groups were formed");
        groups[target].extend(remaining);
        groups[target].sort_unstable();
    }
    groups
}

/// Microaggregates `data` with minimum group size `k`.
pub fn mdav(data: &NumericMatrix, k: usize) -> Result<NumericMatrix> {
    let (n, p) = data.shape();
    if k < 1 || k > n {
        return Err(Error::invalid(format!(
            "mdav group size must lie in 1..={n}, got {k}"
        )));
    }
    if k == 1 {
        return Ok(data.clone());
    }

    let mut values = data.values().to_vec();
    for group in mdav_groups(data, k) {
        for j in 0..p {
            let mean =
                sum::sum(group.iter().map(|&i| data.get(i, j))) / group.len() as f64;
            for &i in &group {
                values[i * p + j] = mean;
            }
        }
    }
    data.replace_values(values)
}
