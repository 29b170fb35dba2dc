//! Sampling sets for bandlimited graph signals and their interpolators.
//!
//! A sampling set `N_s` selects rows of `U_k`; any `k`-bandlimited signal is
//! recovered from its samples whenever `rank(ΦU_k) = k`, using the
//! minimum-norm interpolator `Ψ = U_k (ΦU_k)⁺`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, GspError, Result};

/// Relative margin a candidate must beat the incumbent by during greedy
/// selection; anything closer counts as a tie and keeps the lower index.
const TIE_TOL: f64 = 1e-12;

fn rows(uk: &DMatrix<f64>, indices: &[usize]) -> DMatrix<f64> {
    uk.select_rows(indices)
}

/// Singular values of `ΦU_k`, descending.
fn singular_values(uk: &DMatrix<f64>, indices: &[usize]) -> DVector<f64> {
    if indices.is_empty() || uk.ncols() == 0 {
        return DVector::zeros(0);
    }
    let mut s = rows(uk, indices).singular_values();
    s.as_mut_slice().sort_by(|a, b| b.total_cmp(a));
    s
}

/// `σ_min(ΦU_k)`, zero when fewer than `k` rows are selected.
pub fn smallest_singular_value(uk: &DMatrix<f64>, indices: &[usize]) -> f64 {
    if indices.len() < uk.ncols() {
        return 0.0;
    }
    singular_values(uk, indices).min()
}

/// Greedy score: `σ_min` once at least `k` rows are selected, otherwise the
/// product of the singular values (the volume spanned by the selected rows).
fn greedy_score(uk: &DMatrix<f64>, indices: &[usize]) -> f64 {
    let s = singular_values(uk, indices);
    if indices.len() >= uk.ncols() {
        s.min()
    } else {
        s.iter().product()
    }
}

/// Grows a sampling set one node at a time, each step adding the node that
/// maximizes [`greedy_score`]. Ties go to the lowest index.
pub fn greedy_select(uk: &DMatrix<f64>, ns: usize) -> Result<Vec<usize>> {
    let n = uk.nrows();
    if ns < 1 || ns > n {
        return Err(GspError::Parameter(format!(
            "sample count ns = {ns} must lie in [1, {n}]"
        )));
    }
    let mut selected: Vec<usize> = Vec::with_capacity(ns);
    let mut taken = vec![false; n];
    let mut trial = Vec::with_capacity(ns);
    while selected.len() < ns {
        let mut best: Option<(usize, f64)> = None;
        for candidate in (0..n).filter(|&i| !taken[i]) {
            trial.clear();
            trial.extend_from_slice(&selected);
            trial.push(candidate);
            let score = greedy_score(uk, &trial);
            let better = match best {
                None => true,
                Some((_, b)) => score > b + TIE_TOL * b.abs().max(1e-300),
            };
            if better {
                best = Some((candidate, score));
            }
        }
        let (pick, _) = best.expect("at least one candidate remains");
        taken[pick] = true;
        selected.push(pick);
    }
    Ok(selected)
}

/// `rank(ΦU_k) = k`, judged by `σ_min > n·ε·σ_max`.
pub fn verify_rank(indices: &[usize], uk: &DMatrix<f64>) -> bool {
    let k = uk.ncols();
    if indices.len() < k || k == 0 || indices.iter().any(|&i| i >= uk.nrows()) {
        return false;
    }
    let s = singular_values(uk, indices);
    s.min() > uk.nrows() as f64 * f64::EPSILON * s.max()
}

/// Serializable description of a sampling plan, `{"k": …, "indices": […]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlanSpec {
    pub k: usize,
    pub indices: Vec<usize>,
}

/// A sampling set together with its interpolation operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    indices: Vec<usize>,
    k: usize,
    psi: DMatrix<f64>,
}

impl SamplingPlan {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The `n × n_s` interpolator `Ψ`.
    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.psi.nrows()
    }

    /// `Φy`, the sampled entries.
    pub fn sample(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.n(), y.len())?;
        Ok(DVector::from_iterator(
            self.indices.len(),
            self.indices.iter().map(|&i| y[i]),
        ))
    }

    /// `Φ` applied to every column of a signal matrix.
    pub fn sample_matrix(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.n(), y.nrows())?;
        Ok(y.select_rows(&self.indices))
    }

    pub fn spec(&self) -> SamplingPlanSpec {
        SamplingPlanSpec {
            k: self.k,
            indices: self.indices.clone(),
        }
    }
}

/// Builds `Ψ = U_k (ΦU_k)⁺` for a sampling set satisfying the rank condition.
pub fn build_interpolator(uk: &DMatrix<f64>, indices: &[usize]) -> Result<SamplingPlan> {
    let n = uk.nrows();
    let k = uk.ncols();
    if indices.is_empty() {
        return Err(GspError::Parameter("sampling set is empty".into()));
    }
    let mut seen = vec![false; n];
    for &i in indices {
        if i >= n {
            return Err(GspError::Validation(format!(
                "sample index {i} out of range for n = {n}"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(GspError::Validation(format!("sample index {i} repeated")));
        }
    }
    if !verify_rank(indices, uk) {
        return Err(GspError::RankDeficient {
            sigma_min: smallest_singular_value(uk, indices),
            k,
        });
    }
    let sampled = rows(uk, indices);
    let pinv = sampled
        .svd(true, true)
        .pseudo_inverse(0.0)
        .map_err(|e| GspError::Numerical(e.to_string()))?;
    Ok(SamplingPlan {
        indices: indices.to_vec(),
        k,
        psi: uk * pinv,
    })
}

/// `ŷ = Ψ y_samp`.
pub fn reconstruct(plan: &SamplingPlan, y_samp: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(plan.indices.len(), y_samp.len())?;
    Ok(&plan.psi * y_samp)
}

/// Reconstructs every column of an `n_s × m` sample matrix.
pub fn reconstruct_matrix(plan: &SamplingPlan, y_samp: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_dim(plan.indices.len(), y_samp.nrows())?;
    Ok(&plan.psi * y_samp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BlockModel, Graph};
    use crate::spectral::eigendecompose;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_columns_pick_leading_rows() {
        let uk = DMatrix::<f64>::identity(7, 3);
        let mut sel = greedy_select(&uk, 3).unwrap();
        sel.sort();
        assert_eq!(sel, vec![0, 1, 2]);
        assert!(verify_rank(&sel, &uk));
    }

    #[test]
    fn full_sampling_has_unit_sigma_min() {
        let b = eigendecompose(&Graph::path(9).unwrap().laplacian()).unwrap();
        let uk = b.low_band(4);
        let sel = greedy_select(&uk, 9).unwrap();
        assert_abs_diff_eq!(smallest_singular_value(&uk, &sel), 1.0, epsilon = 1e-10);
        let plan = build_interpolator(&uk, &sel).unwrap();
        // Full sampling: ΨΦ is the bandlimited projector.
        let mut phi = DMatrix::zeros(9, 9);
        for (q, &j) in sel.iter().enumerate() {
            phi[(q, j)] = 1.0;
        }
        let proj = plan.psi() * phi;
        assert_abs_diff_eq!(
            (proj - b.low_band_projector(4)).amax(),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn block_limit_samples_every_block() {
        let model = BlockModel::new(12, 3, 0.5, 0.1).unwrap();
        let z = model.membership_matrix();
        // An orthonormal basis of the block indicators, rotated.
        let rot = DMatrix::from_row_slice(3, 3, &[0.6, 0.8, 0.0, -0.8, 0.6, 0.0, 0.0, 0.0, 1.0]);
        let uk = &z * rot * (3.0f64 / 12.0).sqrt();
        for ns in 3..=6 {
            let sel = greedy_select(&uk, ns).unwrap();
            let blocks: std::collections::BTreeSet<_> = sel.iter().map(|&i| i / 4).collect();
            assert_eq!(blocks.len(), 3);
            assert!(verify_rank(&sel, &uk));
        }
        // Two nodes from block 0, one from block 1, block 2 unsampled.
        assert!(!verify_rank(&[0, 1, 4], &uk));
        assert!(matches!(
            build_interpolator(&uk, &[0, 1, 4]),
            Err(GspError::RankDeficient { .. })
        ));
    }

    #[test]
    fn too_few_samples_fail_rank() {
        let b = eigendecompose(&Graph::path(8).unwrap().laplacian()).unwrap();
        let uk = b.low_band(3);
        assert!(!verify_rank(&[0, 7], &uk));
        assert!(greedy_select(&uk, 0).is_err());
        assert!(greedy_select(&uk, 9).is_err());
    }

    #[test]
    fn constants_from_one_sample() {
        let b = eigendecompose(&Graph::complete(6).unwrap().laplacian()).unwrap();
        let uk = b.low_band(1);
        for i in 0..6 {
            let plan = build_interpolator(&uk, &[i]).unwrap();
            let y = reconstruct(&plan, &DVector::from_element(1, 3.0)).unwrap();
            assert_abs_diff_eq!(
                (y - DVector::from_element(6, 3.0)).amax(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn path_graph_recovery() {
        let b = eigendecompose(&Graph::path(8).unwrap().laplacian()).unwrap();
        let uk = b.low_band(3);
        let sel = greedy_select(&uk, 3).unwrap();
        let plan = build_interpolator(&uk, &sel).unwrap();
        let coeffs = DVector::from_vec(vec![0.7, -1.3, 2.1]);
        let y = &uk * coeffs;
        let y_hat = reconstruct(&plan, &plan.sample(&y).unwrap()).unwrap();
        assert!((y_hat - &y).norm() <= 1e-8 * y.norm());
        assert!(reconstruct(&plan, &DVector::zeros(4)).is_err());
    }

    #[test]
    fn rejects_bad_indices() {
        let uk = DMatrix::<f64>::identity(4, 2);
        assert!(build_interpolator(&uk, &[0, 0]).is_err());
        assert!(build_interpolator(&uk, &[0, 9]).is_err());
        assert!(build_interpolator(&uk, &[]).is_err());
    }
}
