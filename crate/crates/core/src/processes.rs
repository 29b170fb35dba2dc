//! Synthetic low-pass graph signals `y_ℓ = H(L)x_ℓ + w_ℓ` and the second-order
//! statistics they imply.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{check_dim, GspError, Result};
use crate::filters::{apply_response, frequency_response, FilterSpec};
use crate::spectral::{symmetric_eigen, SpectralBasis};

/// `n × m` matrix whose column `ℓ` is the observation `y_ℓ`.
pub type SignalMatrix = DMatrix<f64>;

/// A symmetric positive semidefinite covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    matrix: DMatrix<f64>,
}

impl CovarianceModel {
    /// Checks symmetry within `1e-10` and eigenvalues `≥ −1e-9`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (lambdas, _) = symmetric_eigen(&matrix)?;
        if lambdas.iter().any(|&l| l < -1e-9) {
            return Err(GspError::Validation(
                "covariance has a negative eigenvalue".into(),
            ));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

fn standard_normal_column(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| StandardNormal.sample(rng)))
}

fn column_rng(seed: u64, column: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(column as u64);
    rng
}

/// Draws `m` i.i.d. signals `y = H(L)x + w` with standard Gaussian `x` and
/// `w ~ N(0, σ²I)`.
///
/// Column `ℓ` uses its own RNG stream, so the output does not depend on how
/// columns are scheduled across threads.
pub fn sample_lowpass_signals(
    basis: &SpectralBasis,
    spec: &FilterSpec,
    m: usize,
    sigma: f64,
    seed: u64,
) -> Result<SignalMatrix> {
    let n = basis.n();
    sample_impl(basis, spec, None, n, m, sigma, seed)
}

/// As [`sample_lowpass_signals`] with the excitation premultiplied by an
/// `n × r` mixing matrix, `y = H(L)Bx + w` with `x ∈ ℝ^r`.
pub fn sample_lowpass_signals_mixed(
    basis: &SpectralBasis,
    spec: &FilterSpec,
    mixing: &DMatrix<f64>,
    m: usize,
    sigma: f64,
    seed: u64,
) -> Result<SignalMatrix> {
    check_dim(basis.n(), mixing.nrows())?;
    sample_impl(basis, spec, Some(mixing), mixing.ncols(), m, sigma, seed)
}

fn sample_impl(
    basis: &SpectralBasis,
    spec: &FilterSpec,
    mixing: Option<&DMatrix<f64>>,
    excitation_dim: usize,
    m: usize,
    sigma: f64,
    seed: u64,
) -> Result<SignalMatrix> {
    if m == 0 {
        return Err(GspError::Parameter(
            "number of signals m must be at least 1".into(),
        ));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(GspError::Parameter(format!(
            "noise level sigma = {sigma} must be >= 0"
        )));
    }
    let n = basis.n();
    let response = frequency_response(spec, basis.lambdas().as_slice())?;
    let columns: Vec<(DVector<f64>, DVector<f64>)> = (0..m)
        .into_par_iter()
        .map(|col| {
            let mut rng = column_rng(seed, col);
            let x = standard_normal_column(&mut rng, excitation_dim);
            let w = standard_normal_column(&mut rng, n);
            (x, w)
        })
        .collect();
    let mut excitation = DMatrix::zeros(excitation_dim, m);
    let mut noise = DMatrix::zeros(n, m);
    for (col, (x, w)) in columns.into_iter().enumerate() {
        excitation.set_column(col, &x);
        noise.set_column(col, &w);
    }
    let excitation = match mixing {
        Some(b) => b * excitation,
        None => excitation,
    };
    Ok(apply_response(basis, &response, &excitation) + noise * sigma)
}

/// `C_y = U h(Λ)² Uᵀ + σ²I`.
pub fn covariance_model(
    basis: &SpectralBasis,
    spec: &FilterSpec,
    sigma: f64,
) -> Result<CovarianceModel> {
    let response = frequency_response(spec, basis.lambdas().as_slice())?;
    let squared: Vec<f64> = response.iter().map(|h| h * h).collect();
    let n = basis.n();
    let mut c = basis.synthesize_operator(&squared)?;
    c += DMatrix::identity(n, n) * (sigma * sigma);
    let c = (&c + c.transpose()) * 0.5;
    Ok(CovarianceModel::new_unchecked(c))
}

/// Heat diffusion `e^{−tσL} x₀`, evaluated in the spectral domain.
pub fn diffusion_snapshot(
    basis: &SpectralBasis,
    t_sigma: f64,
    x0: &DVector<f64>,
) -> Result<DVector<f64>> {
    if !(t_sigma >= 0.0 && t_sigma.is_finite()) {
        return Err(GspError::Parameter(format!(
            "diffusion time t_sigma = {t_sigma} must be >= 0"
        )));
    }
    check_dim(basis.n(), x0.len())?;
    let response: Vec<f64> = basis
        .lambdas()
        .iter()
        .map(|&l| (-t_sigma * l).exp())
        .collect();
    let coeffs = basis
        .vectors()
        .tr_mul(x0)
        .component_mul(&DVector::from_vec(response));
    Ok(basis.vectors() * coeffs)
}

/// Approximate expected smoothness `Σ_{i≤k} λ_i h(λ_i)² + σ² Tr(L)`.
pub fn smoothness_expectation(
    basis: &SpectralBasis,
    spec: &FilterSpec,
    sigma: f64,
    k: usize,
) -> Result<f64> {
    let n = basis.n();
    if k > n {
        return Err(GspError::Parameter(format!(
            "k = {k} exceeds the number of nodes {n}"
        )));
    }
    let response = frequency_response(spec, basis.lambdas().as_slice())?;
    let lambdas = basis.lambdas();
    let signal: f64 = (0..k).map(|i| lambdas[i] * response[i] * response[i]).sum();
    Ok(signal + sigma * sigma * lambdas.sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::spectral::eigendecompose;
    use approx::assert_abs_diff_eq;

    fn basis(n: usize) -> SpectralBasis {
        eigendecompose(&Graph::path(n).unwrap().laplacian()).unwrap()
    }

    #[test]
    fn zero_filter_no_noise_is_zero() {
        let y = sample_lowpass_signals(&basis(5), &FilterSpec::zero(), 7, 0.0, 1).unwrap();
        assert_eq!(y, DMatrix::zeros(5, 7));
    }

    #[test]
    fn sampling_is_seeded() {
        let b = basis(6);
        let spec = FilterSpec::Diffusion { t_sigma: 0.5 };
        let a = sample_lowpass_signals(&b, &spec, 9, 0.1, 42).unwrap();
        assert_eq!(a, sample_lowpass_signals(&b, &spec, 9, 0.1, 42).unwrap());
        assert_ne!(a, sample_lowpass_signals(&b, &spec, 9, 0.1, 43).unwrap());
        // Column streams are independent of m.
        let longer = sample_lowpass_signals(&b, &spec, 12, 0.1, 42).unwrap();
        assert_eq!(a, longer.columns(0, 9).into_owned());
    }

    #[test]
    fn sampling_errors() {
        let b = basis(4);
        assert!(sample_lowpass_signals(&b, &FilterSpec::identity(), 0, 0.1, 1).is_err());
        assert!(sample_lowpass_signals(&b, &FilterSpec::identity(), 3, -0.1, 1).is_err());
    }

    #[test]
    fn ideal_lowpass_samples_stay_in_band() {
        let b = basis(10);
        let y = sample_lowpass_signals(&b, &FilterSpec::IdealLowPass { k: 3 }, 20, 0.0, 5).unwrap();
        let p = b.low_band_projector(3);
        assert!((&p * &y - &y).amax() <= 1e-10);
    }

    #[test]
    fn mixed_excitation() {
        let b = basis(4);
        let mixing = DMatrix::from_element(4, 1, 1.0);
        let y =
            sample_lowpass_signals_mixed(&b, &FilterSpec::identity(), &mixing, 5, 0.0, 2).unwrap();
        for col in y.column_iter() {
            assert_abs_diff_eq!(col.max() - col.min(), 0.0, epsilon = 1e-12);
        }
        assert!(sample_lowpass_signals_mixed(
            &b,
            &FilterSpec::identity(),
            &DMatrix::zeros(3, 1),
            5,
            0.0,
            2
        )
        .is_err());
    }

    #[test]
    fn covariance_examples() {
        let b = basis(6);
        let c = covariance_model(&b, &FilterSpec::identity(), 0.0).unwrap();
        assert_abs_diff_eq!(
            (c.matrix() - DMatrix::identity(6, 6)).amax(),
            0.0,
            epsilon = 1e-12
        );
        let c = covariance_model(&b, &FilterSpec::IdealLowPass { k: 2 }, 0.0).unwrap();
        assert_eq!(c.matrix().rank(1e-9), 2);
        assert!(CovarianceModel::new(c.matrix().clone()).is_ok());
        assert!(CovarianceModel::new(-DMatrix::<f64>::identity(2, 2)).is_err());
    }

    #[test]
    fn diffusion_snapshot_examples() {
        let b = basis(7);
        let x0 = DVector::from_fn(7, |i, _| (i as f64 - 2.0).powi(2));
        assert_abs_diff_eq!(
            (diffusion_snapshot(&b, 0.0, &x0).unwrap() - &x0).amax(),
            0.0,
            epsilon = 1e-12
        );
        let far = diffusion_snapshot(&b, 1e4, &x0).unwrap();
        assert_abs_diff_eq!(
            (far - DVector::from_element(7, x0.mean())).amax(),
            0.0,
            epsilon = 1e-9
        );
        let y = diffusion_snapshot(&b, 1.3, &x0).unwrap();
        assert_abs_diff_eq!(y.sum(), x0.sum(), epsilon = 1e-9);
        assert!(diffusion_snapshot(&b, -1.0, &x0).is_err());
    }

    #[test]
    fn smoothness_examples() {
        let b = basis(8);
        assert_abs_diff_eq!(
            smoothness_expectation(&b, &FilterSpec::IdealLowPass { k: 1 }, 0.0, 1).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let tr = b.lambdas().sum();
        assert_abs_diff_eq!(
            smoothness_expectation(&b, &FilterSpec::zero(), 0.3, 4).unwrap(),
            0.09 * tr,
            epsilon = 1e-12
        );
        assert!(smoothness_expectation(&b, &FilterSpec::zero(), 0.3, 9).is_err());
    }
}
