use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GspError, Result};
use crate::graph::Laplacian;
use crate::processes::{CovarianceModel, SignalMatrix};
use crate::spectral::{eigendecompose, symmetric_eigen};

const MAX_LLOYD_ITERS: usize = 300;

/// A partition of the nodes into `k` communities.
///
/// Labels are zero-based and numbered in order of first appearance.
/// `objective` is the k-means cost `F`, the square root of the within-cluster
/// sum of squared distances.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityAssignment {
    pub labels: Vec<usize>,
    pub objective: f64,
}

/// `(1/m)·Y·Yᵀ`, treating signals as zero-mean.
pub fn sample_covariance(y: &SignalMatrix) -> Result<CovarianceModel> {
    let m = y.ncols();
    if m == 0 {
        return Err(GspError::Parameter(
            "sample covariance needs at least one signal".into(),
        ));
    }
    let c = (y * y.transpose()) / m as f64;
    let c = (&c + c.transpose()) * 0.5;
    Ok(CovarianceModel::new_unchecked(c))
}

/// Removes each node's mean across the observations.
pub fn center_signals(y: &SignalMatrix) -> SignalMatrix {
    let mut out = y.clone();
    for mut row in out.row_iter_mut() {
        let mean = row.mean();
        row.add_scalar_mut(-mean);
    }
    out
}

fn sq_dist(rows: &DMatrix<f64>, i: usize, center: &DVector<f64>) -> f64 {
    rows.row(i)
        .iter()
        .zip(center.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// k-means cost `F` of a labelling, `(Σ_q Σ_{i∈N_q} ‖r_i − mean_q‖²)^{1/2}`.
pub fn kmeans_objective(rows: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let centers = centroids(rows, labels, k);
    labels
        .iter()
        .enumerate()
        .map(|(i, &q)| sq_dist(rows, i, &centers[q]))
        .sum::<f64>()
        .sqrt()
}

fn centroids(rows: &DMatrix<f64>, labels: &[usize], k: usize) -> Vec<DVector<f64>> {
    let d = rows.ncols();
    let mut sums = vec![DVector::zeros(d); k];
    let mut counts = vec![0usize; k];
    for (i, &q) in labels.iter().enumerate() {
        sums[q] += rows.row(i).transpose();
        counts[q] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, c)| if c > 0 { s / c as f64 } else { s })
        .collect()
}

/// k-means++ seeding: first center uniform, then `D²` sampling.
fn plus_plus_init(rows: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let n = rows.nrows();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![rows.row(first).transpose()];
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(rows, i, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in dist.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc >= target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| dist.iter().rposition(|&d| d > 0.0).expect("positive mass"))
        } else {
            // All remaining points coincide with a center.
            chosen.iter().position(|&c| !c).expect("k <= n")
        };
        chosen[pick] = true;
        let c = rows.row(pick).transpose();
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(sq_dist(rows, i, &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(rows: &DMatrix<f64>, i: usize, centers: &[DVector<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (q, c) in centers.iter().enumerate() {
        let d = sq_dist(rows, i, c);
        if d < best.1 {
            best = (q, d);
        }
    }
    best
}

/// One Lloyd run. Empty clusters are re-seeded with the point farthest from
/// its current centroid.
fn lloyd(rows: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = rows.nrows();
    let mut centers = plus_plus_init(rows, k, rng);
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (q, d) = nearest(rows, i, &centers);
            dists[i] = d;
            if labels[i] != q {
                labels[i] = q;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        for &q in &labels {
            counts[q] += 1;
        }
        for q in 0..k {
            if counts[q] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
                if let Some(i) = far {
                    counts[labels[i]] -= 1;
                    labels[i] = q;
                    counts[q] = 1;
                    dists[i] = 0.0;
                    changed = true;
                }
            }
        }
        centers = centroids(rows, &labels, k);
        if !changed {
            break;
        }
    }
    labels
}

fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Lloyd's algorithm from k-means++ seeding; the best of `restarts` runs.
///
/// Restart `r` draws from its own stream of the seeded generator, and ties in
/// the objective go to the lower restart index, so results do not depend on
/// thread scheduling and adding restarts never increases the objective.
pub fn kmeans(
    rows: &DMatrix<f64>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<CommunityAssignment> {
    let n = rows.nrows();
    if k < 1 || k > n {
        return Err(GspError::Parameter(format!(
            "cluster count k = {k} must lie in [1, {n}]"
        )));
    }
    if restarts < 1 {
        return Err(GspError::Parameter(
            "k-means needs at least one restart".into(),
        ));
    }
    let runs: Vec<(f64, Vec<usize>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let labels = lloyd(rows, k, &mut rng);
            (kmeans_objective(rows, &labels), labels)
        })
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.0 < runs[best].0 {
            best = r;
        }
    }
    let (objective, labels) = runs.into_iter().nth(best).expect("restarts >= 1");
    Ok(CommunityAssignment {
        labels: canonical_labels(&labels),
        objective,
    })
}

/// k-means on the rows of the bottom-`k` Laplacian eigenvectors.
pub fn spectral_clustering(
    l: &Laplacian,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<CommunityAssignment> {
    if k < 1 || k > l.n() {
        return Err(GspError::Parameter(format!(
            "cluster count k = {k} must lie in [1, {}]",
            l.n()
        )));
    }
    let basis = eigendecompose(l)?;
    kmeans(&basis.low_band(k), k, restarts, seed)
}

/// Blind community detection: k-means on the rows of the top-`k`
/// eigenvectors of the sample covariance.
pub fn blind_cd(
    y: &SignalMatrix,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<CommunityAssignment> {
    let n = y.nrows();
    if k < 1 || k > n {
        return Err(GspError::Parameter(format!(
            "cluster count k = {k} must lie in [1, {n}]"
        )));
    }
    let cov = sample_covariance(y)?;
    let (_, vectors) = symmetric_eigen(cov.matrix())?;
    let top = DMatrix::from_fn(n, k, |i, j| vectors[(i, n - 1 - j)]);
    kmeans(&top, k, restarts, seed)
}

/// Fraction of nodes whose labels agree after the best one-to-one relabelling.
pub fn accuracy(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(GspError::Dimension {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Ok(1.0);
    }
    let size = truth
        .iter()
        .chain(predicted)
        .copied()
        .max()
        .expect("nonempty")
        + 1;
    let mut agree = vec![vec![0i64; size]; size];
    for (&t, &p) in truth.iter().zip(predicted) {
        agree[t][p] += 1;
    }
    let cost: Vec<Vec<i64>> = agree
        .iter()
        .map(|r| r.iter().map(|&c| -c).collect())
        .collect();
    let assignment = hungarian(&cost);
    let matched: i64 = assignment
        .iter()
        .enumerate()
        .map(|(t, &p)| agree[t][p])
        .sum();
    Ok(matched as f64 / truth.len() as f64)
}

/// Minimum-cost perfect matching on a square matrix; returns the column
/// assigned to each row.
fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}
