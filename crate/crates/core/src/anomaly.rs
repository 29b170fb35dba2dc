//! Detection and localization of high-frequency anomalies in signals that
//! are nominally low-pass.
//!
//! Under the null hypothesis a `k`-low-pass signal has little energy outside
//! `span(U_k)`, so the norm of its ideal high-pass component is small. Sparse
//! or high-frequency injections raise it.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, GspError, Result};
use crate::graph::Laplacian;
use crate::processes::SignalMatrix;
use crate::spectral::SpectralBasis;

/// Fewest training signals accepted by [`calibrate_threshold`].
pub const MIN_CALIBRATION_SIGNALS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// No anomaly.
    #[serde(rename = "A0")]
    Null,
    /// Anomaly present.
    #[serde(rename = "A1")]
    Anomaly,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::Null => "A0",
            Hypothesis::Anomaly => "A1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    pub statistic: f64,
    pub decision: Hypothesis,
    pub threshold: f64,
}

fn check_band(basis: &SpectralBasis, k: usize) -> Result<()> {
    let n = basis.n();
    if k < 1 || k >= n {
        return Err(GspError::Parameter(format!(
            "bandwidth k = {k} must lie in [1, {}]",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

/// Ideal high-pass output `(I − U_k U_kᵀ) y`.
pub fn high_pass_component(
    basis: &SpectralBasis,
    k: usize,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_band(basis, k)?;
    check_dim(basis.n(), y.len())?;
    let uk = basis.vectors().columns(0, k);
    let low = &uk * uk.tr_mul(y);
    Ok(y - low)
}

/// `Γ = ‖(I − U_k U_kᵀ) y‖₂`.
pub fn hpf_statistic(basis: &SpectralBasis, k: usize, y: &DVector<f64>) -> Result<f64> {
    Ok(high_pass_component(basis, k, y)?.norm())
}

/// Statistics for every column of a signal matrix.
pub fn hpf_statistics(basis: &SpectralBasis, k: usize, y: &SignalMatrix) -> Result<Vec<f64>> {
    y.column_iter()
        .map(|c| hpf_statistic(basis, k, &c.into_owned()))
        .collect()
}

/// Empirical `quantile` of the statistics over anomaly-free training signals
/// (nearest-rank definition, so `quantile = 1` gives the maximum).
pub fn calibrate_threshold(
    basis: &SpectralBasis,
    k: usize,
    y_train: &SignalMatrix,
    quantile: f64,
) -> Result<f64> {
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(GspError::Parameter(format!(
            "quantile {quantile} must lie in (0, 1]"
        )));
    }
    let m = y_train.ncols();
    if m < MIN_CALIBRATION_SIGNALS {
        return Err(GspError::InsufficientCalibration {
            found: m,
            required: MIN_CALIBRATION_SIGNALS,
        });
    }
    let mut stats = hpf_statistics(basis, k, y_train)?;
    stats.sort_by(f64::total_cmp);
    let rank = ((quantile * m as f64).ceil() as usize).clamp(1, m);
    Ok(stats[rank - 1])
}

/// Declares an anomaly iff `statistic > threshold`; ties favor the null.
pub fn detect(statistic: f64, threshold: f64) -> Result<DetectionResult> {
    if !(threshold >= 0.0) {
        return Err(GspError::Parameter(format!(
            "threshold {threshold} must be nonnegative"
        )));
    }
    let decision = if statistic > threshold {
        Hypothesis::Anomaly
    } else {
        Hypothesis::Null
    };
    Ok(DetectionResult {
        statistic,
        decision,
        threshold,
    })
}

/// Nodes whose high-pass component exceeds `entry_threshold` in magnitude.
pub fn localize(
    basis: &SpectralBasis,
    k: usize,
    y: &DVector<f64>,
    entry_threshold: f64,
) -> Result<Vec<usize>> {
    if !(entry_threshold >= 0.0) {
        return Err(GspError::Parameter(format!(
            "entry threshold {entry_threshold} must be nonnegative"
        )));
    }
    let hp = high_pass_component(basis, k, y)?;
    Ok(hp
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > entry_threshold)
        .map(|(i, _)| i)
        .collect())
}

/// `Ly = Dy − Ay`: each node's deviation from its weighted neighbourhood.
pub fn spatial_difference(l: &Laplacian, y: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(l.n(), y.len())?;
    Ok(l.matrix() * y)
}

/// Area under the ROC curve for scores where larger means "more anomalous".
/// Ties count one half.
pub fn roc_auc(null_scores: &[f64], alt_scores: &[f64]) -> f64 {
    if null_scores.is_empty() || alt_scores.is_empty() {
        return f64::NAN;
    }
    let mut wins = 0.0;
    for &a in alt_scores {
        for &z in null_scores {
            if a > z {
                wins += 1.0;
            } else if a == z {
                wins += 0.5;
            }
        }
    }
    wins / (null_scores.len() * alt_scores.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::spectral::eigendecompose;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn basis() -> SpectralBasis {
        eigendecompose(&Graph::path(8).unwrap().laplacian()).unwrap()
    }

    #[test]
    fn statistic_examples() {
        let b = basis();
        let low = b.vectors().column(0) * 2.0 - b.vectors().column(2);
        assert_abs_diff_eq!(hpf_statistic(&b, 3, &low).unwrap(), 0.0, epsilon = 1e-12);
        let un = b.vectors().column(7).into_owned();
        assert_abs_diff_eq!(hpf_statistic(&b, 3, &un).unwrap(), 1.0, epsilon = 1e-12);
        let mix = b.vectors().column(0) + b.vectors().column(7) * 0.3;
        assert_abs_diff_eq!(hpf_statistic(&b, 1, &mix).unwrap(), 0.3, epsilon = 1e-12);
        assert!(hpf_statistic(&b, 0, &mix).is_err());
        assert!(hpf_statistic(&b, 8, &mix).is_err());
    }

    #[test]
    fn calibration_examples() {
        let b = basis();
        assert_eq!(
            calibrate_threshold(&b, 2, &DMatrix::zeros(8, 12), 0.9).unwrap(),
            0.0
        );
        let y = DMatrix::from_fn(8, 12, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0);
        let stats = hpf_statistics(&b, 2, &y).unwrap();
        let max = stats.iter().copied().fold(0.0, f64::max);
        assert_eq!(calibrate_threshold(&b, 2, &y, 1.0).unwrap(), max);
        assert!(matches!(
            calibrate_threshold(&b, 2, &DMatrix::zeros(8, 9), 0.9),
            Err(GspError::InsufficientCalibration { found: 9, .. })
        ));
        assert!(calibrate_threshold(&b, 2, &y, 0.0).is_err());
    }

    #[test]
    fn detection_rule() {
        assert_eq!(detect(0.0, 0.1).unwrap().decision, Hypothesis::Null);
        assert_eq!(detect(0.5, 0.1).unwrap().decision, Hypothesis::Anomaly);
        assert_eq!(detect(0.1, 0.1).unwrap().decision, Hypothesis::Null);
        assert!(detect(0.1, -0.1).is_err());
        assert_eq!(Hypothesis::Anomaly.to_string(), "A1");
    }

    #[test]
    fn localization_examples() {
        let b = basis();
        let low = b.vectors().column(1).into_owned();
        assert!(localize(&b, 2, &low, 1e-9).unwrap().is_empty());
        let mut spiked = low.clone();
        spiked[5] += 3.0;
        assert!(localize(&b, 2, &spiked, f64::INFINITY).unwrap().is_empty());
        assert_eq!(localize(&b, 2, &spiked, 1.5).unwrap(), vec![5]);
    }

    #[test]
    fn spatial_difference_examples() {
        let g = Graph::path(6).unwrap();
        let l = g.laplacian();
        let b = eigendecompose(&l).unwrap();
        assert_abs_diff_eq!(
            spatial_difference(&l, &DVector::from_element(6, 4.0))
                .unwrap()
                .amax(),
            0.0,
            epsilon = 1e-12
        );
        for i in 0..6 {
            let u = b.vectors().column(i).into_owned();
            let out = spatial_difference(&l, &u).unwrap();
            assert_abs_diff_eq!((out - &u * b.lambdas()[i]).amax(), 0.0, epsilon = 1e-12);
        }
        assert!(spatial_difference(&l, &DVector::zeros(5)).is_err());
    }

    #[test]
    fn auc_extremes() {
        assert_eq!(roc_auc(&[0.0, 0.1], &[1.0, 2.0]), 1.0);
        assert_eq!(roc_auc(&[1.0, 2.0], &[0.0, 0.1]), 0.0);
        assert_eq!(roc_auc(&[1.0], &[1.0]), 0.5);
    }
}
