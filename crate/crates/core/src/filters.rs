//! Graph filters: filter descriptions, frequency responses, vertex- and
//! spectral-domain application, and the low-pass ratio `η_k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, GspError, Result};
use crate::graph::Laplacian;
use crate::spectral::SpectralBasis;

/// A graph filter, either by coefficients, by a tabulated response, or by name.
///
/// Serialized as `{"kind": "...", ...parameters}`. Polynomial coefficients
/// are listed lowest order first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSpec {
    /// `Σ_p h_p L^p`.
    Polynomial { coeffs: Vec<f64> },
    /// Response tabulated at each eigenvalue, ascending.
    Response { values: Vec<f64> },
    /// Passes the `k` lowest graph frequencies.
    IdealLowPass { k: usize },
    /// Blocks the `k` lowest graph frequencies.
    IdealHighPass { k: usize },
    /// Heat kernel `e^{−tσL}`.
    Diffusion { t_sigma: f64 },
    /// `(I + αL)^{-1}`.
    Resolvent { alpha: f64 },
    /// `I − L/λ_n`.
    Order1,
    /// Equilibrium of `y ← (1−β)·H(L)y + β·x`, i.e. `β(I − (1−β)H(L))^{-1}`.
    FinanceEquilibrium { beta: f64, inner: Box<FilterSpec> },
}

impl FilterSpec {
    pub fn identity() -> Self {
        FilterSpec::Polynomial { coeffs: vec![1.0] }
    }

    pub fn zero() -> Self {
        FilterSpec::Polynomial { coeffs: vec![0.0] }
    }

    /// Checks the parameter invariants that do not depend on a spectrum.
    pub fn validate(&self) -> Result<()> {
        match self {
            FilterSpec::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(GspError::Parameter(
                        "polynomial filter needs at least one coefficient".into(),
                    ));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(GspError::Parameter(
                        "polynomial coefficients must be finite".into(),
                    ));
                }
            }
            FilterSpec::Response { values } => {
                if values.iter().any(|c| !c.is_finite()) {
                    return Err(GspError::Parameter(
                        "tabulated response must be finite".into(),
                    ));
                }
            }
            FilterSpec::Diffusion { t_sigma } => {
                if !(*t_sigma > 0.0 && t_sigma.is_finite()) {
                    return Err(GspError::Parameter(format!(
                        "diffusion time t_sigma = {t_sigma} must be > 0"
                    )));
                }
            }
            FilterSpec::Resolvent { alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(GspError::Parameter(format!(
                        "resolvent alpha = {alpha} must be > 0"
                    )));
                }
            }
            FilterSpec::FinanceEquilibrium { beta, inner } => {
                if !(*beta > 0.0 && *beta < 1.0) {
                    return Err(GspError::Parameter(format!(
                        "finance beta = {beta} must lie in (0, 1)"
                    )));
                }
                inner.validate()?;
            }
            FilterSpec::IdealLowPass { .. }
            | FilterSpec::IdealHighPass { .. }
            | FilterSpec::Order1 => {}
        }
        Ok(())
    }
}

fn check_ascending(lambdas: &[f64]) -> Result<()> {
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(GspError::Validation(
            "eigenvalues must be sorted ascending".into(),
        ));
    }
    Ok(())
}

/// Evaluates `h(λ_i)` at every eigenvalue. `0⁰ = 1` for polynomials.
pub fn frequency_response(spec: &FilterSpec, lambdas: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    check_ascending(lambdas)?;
    let n = lambdas.len();
    let out = match spec {
        FilterSpec::Polynomial { coeffs } => lambdas
            .iter()
            .map(|&l| coeffs.iter().rev().fold(0.0, |acc, &c| acc * l + c))
            .collect(),
        FilterSpec::Response { values } => {
            check_dim(n, values.len())?;
            values.clone()
        }
        FilterSpec::IdealLowPass { k } => (0..n).map(|i| if i < *k { 1.0 } else { 0.0 }).collect(),
        FilterSpec::IdealHighPass { k } => (0..n).map(|i| if i < *k { 0.0 } else { 1.0 }).collect(),
        FilterSpec::Diffusion { t_sigma } => {
            lambdas.iter().map(|&l| (-t_sigma * l).exp()).collect()
        }
        FilterSpec::Resolvent { alpha } => {
            lambdas.iter().map(|&l| 1.0 / (1.0 + alpha * l)).collect()
        }
        FilterSpec::Order1 => {
            let top = lambdas.last().copied().unwrap_or(0.0);
            if top <= 0.0 {
                return Err(GspError::Validation(
                    "order-1 filter needs a positive largest eigenvalue".into(),
                ));
            }
            lambdas.iter().map(|&l| (top - l) / top).collect()
        }
        FilterSpec::FinanceEquilibrium { beta, inner } => {
            let inner = frequency_response(inner, lambdas)?;
            let mut out = Vec::with_capacity(n);
            for (i, h) in inner.into_iter().enumerate() {
                let denom = 1.0 - (1.0 - beta) * h;
                if denom <= 0.0 {
                    return Err(GspError::Instability(format!(
                        "finance equilibrium denominator {denom:e} <= 0 at lambda_{} = {}",
                        i + 1,
                        lambdas[i]
                    )));
                }
                out.push(beta / denom);
            }
            out
        }
    };
    Ok(out)
}

/// `Σ_p h_p L^p X` by Horner's rule, one shift per coefficient.
pub fn apply_polynomial(l: &Laplacian, coeffs: &[f64], x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if coeffs.is_empty() {
        return Err(GspError::Parameter(
            "polynomial filter needs at least one coefficient".into(),
        ));
    }
    check_dim(l.n(), x.nrows())?;
    let (last, rest) = coeffs.split_last().expect("nonempty");
    let mut y = x * *last;
    for &c in rest.iter().rev() {
        y = l.matrix() * &y;
        y += x * c;
    }
    Ok(y)
}

/// `U · Diag(h(λ)) · Uᵀ X`.
pub fn apply_spectral(
    basis: &SpectralBasis,
    spec: &FilterSpec,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_dim(basis.n(), x.nrows())?;
    let response = frequency_response(spec, basis.lambdas().as_slice())?;
    Ok(apply_response(basis, &response, x))
}

/// Applies a response already tabulated at the basis eigenvalues.
pub(crate) fn apply_response(
    basis: &SpectralBasis,
    response: &[f64],
    x: &DMatrix<f64>,
) -> DMatrix<f64> {
    let mut coeffs = basis.vectors().tr_mul(x);
    for (mut row, &h) in coeffs.row_iter_mut().zip(response) {
        row *= h;
    }
    basis.vectors() * coeffs
}

/// `e^{−tσL} X` without an eigendecomposition.
///
/// The exponential is split into `s` equal steps with `tσ‖L‖_∞/s ≤ 1`, and each
/// step is a Taylor series truncated once the next term falls below `1e-12`
/// relative to the partial sum.
pub fn diffusion_series(l: &Laplacian, t_sigma: f64, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !(t_sigma >= 0.0 && t_sigma.is_finite()) {
        return Err(GspError::Parameter(format!(
            "diffusion time t_sigma = {t_sigma} must be >= 0"
        )));
    }
    check_dim(l.n(), x.nrows())?;
    let norm = l
        .matrix()
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = (t_sigma * norm).ceil().max(1.0) as usize;
    let h = t_sigma / steps as f64;
    let mut y = x.clone();
    for _ in 0..steps {
        let mut acc = y.clone();
        let mut term = y;
        for p in 1..=200 {
            term = l.matrix() * &term * (-h / p as f64);
            acc += &term;
            if term.amax() <= 1e-12 * acc.amax().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        y = acc;
    }
    Ok(y)
}

/// Evaluates a closed-form response at an arbitrary `λ`.
///
/// Tabulated and index-based kinds (`Response`, `IdealLowPass`,
/// `IdealHighPass`) have no value off the spectrum and are rejected.
/// `Order1` needs the largest eigenvalue of the spectrum it refers to.
pub fn response_at(spec: &FilterSpec, lambda: f64, lambda_max: f64) -> Result<f64> {
    spec.validate()?;
    match spec {
        FilterSpec::Polynomial { coeffs } => {
            Ok(coeffs.iter().rev().fold(0.0, |acc, &c| acc * lambda + c))
        }
        FilterSpec::Diffusion { t_sigma } => Ok((-t_sigma * lambda).exp()),
        FilterSpec::Resolvent { alpha } => Ok(1.0 / (1.0 + alpha * lambda)),
        FilterSpec::Order1 => {
            if lambda_max <= 0.0 {
                return Err(GspError::Validation(
                    "order-1 filter needs a positive largest eigenvalue".into(),
                ));
            }
            Ok((lambda_max - lambda) / lambda_max)
        }
        FilterSpec::FinanceEquilibrium { beta, inner } => {
            let denom = 1.0 - (1.0 - beta) * response_at(inner, lambda, lambda_max)?;
            if denom <= 0.0 {
                return Err(GspError::Instability(format!(
                    "finance equilibrium denominator {denom:e} <= 0 at lambda = {lambda}"
                )));
            }
            Ok(beta / denom)
        }
        FilterSpec::Response { .. }
        | FilterSpec::IdealLowPass { .. }
        | FilterSpec::IdealHighPass { .. } => Err(GspError::Parameter(format!(
            "{spec:?} is only defined on the eigenvalues of a given spectrum"
        ))),
    }
}

/// Low-pass ratio `η_k = max_{i>k}|h(λ_i)| / min_{i≤k}|h(λ_i)|`.
///
/// Returns `+∞` when the low band contains a zero response. The filter is
/// `k`-low-pass iff the ratio is below one.
pub fn low_pass_ratio(response: &[f64], k: usize) -> Result<f64> {
    let n = response.len();
    if k < 1 || k >= n {
        return Err(GspError::Parameter(format!(
            "bandwidth k = {k} must lie in [1, {}]",
            n.saturating_sub(1)
        )));
    }
    let low = response[..k]
        .iter()
        .map(|h| h.abs())
        .fold(f64::INFINITY, f64::min);
    let high = response[k..].iter().map(|h| h.abs()).fold(0.0, f64::max);
    if low == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(high / low)
}

pub fn is_low_pass(response: &[f64], k: usize) -> Result<bool> {
    Ok(low_pass_ratio(response, k)? < 1.0)
}
