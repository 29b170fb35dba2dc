//! Graph-temporal filtering: GF-ARMA recursions, their joint transfer
//! function `ℍ(λ, z) = b̃(z)/ã(z)`, the temporal low-pass ratio and the
//! steady state of the opinion dynamics recursion.
//!
//! Opinion dynamics `y_{t+1} = (1−β)(I − αL)y_t + βx` settle at
//! `(I + α̃L)^{-1}x` with `α̃ = α(1−β)/β`, which is what the recursion's fixed
//! point equation gives.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_dim, GspError, Result};
use crate::filters::{frequency_response, FilterSpec};
use crate::graph::Laplacian;
use crate::spectral::SpectralBasis;

/// `n × T` matrix whose column `t` is the graph signal at time `t`.
pub type TrajectoryMatrix = DMatrix<f64>;

/// A stable GF-ARMA(q, r) filter bound to a graph spectrum.
///
/// `y_t = Σ_{s=1}^{q} A_s(L) y_{t−s} + Σ_{s=0}^{r} B_s(L) x_{t−s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GfArmaSpec {
    ar: Vec<FilterSpec>,
    ma: Vec<FilterSpec>,
    lambdas: Vec<f64>,
    ar_response: Vec<Vec<f64>>,
    ma_response: Vec<Vec<f64>>,
}

/// Relative tolerance for matching an eigenvalue against the bound spectrum.
const LAMBDA_MATCH_TOL: f64 = 1e-12;

impl GfArmaSpec {
    /// Tabulates every tap on `lambdas` and certifies that all roots of
    /// `z^q ã(z)` lie strictly inside the unit circle at every eigenvalue.
    pub fn new(ar: Vec<FilterSpec>, ma: Vec<FilterSpec>, lambdas: &[f64]) -> Result<Self> {
        if ma.is_empty() {
            return Err(GspError::Parameter(
                "GF-ARMA needs at least one moving-average tap".into(),
            ));
        }
        if lambdas.is_empty() {
            return Err(GspError::Parameter(
                "GF-ARMA needs a nonempty spectrum".into(),
            ));
        }
        let ar_response = ar
            .iter()
            .map(|f| frequency_response(f, lambdas))
            .collect::<Result<Vec<_>>>()?;
        let ma_response = ma
            .iter()
            .map(|f| frequency_response(f, lambdas))
            .collect::<Result<Vec<_>>>()?;
        let spec = Self {
            ar,
            ma,
            lambdas: lambdas.to_vec(),
            ar_response,
            ma_response,
        };
        for i in 0..lambdas.len() {
            let radius = spec.pole_radius(i);
            if !(radius < 1.0) {
                return Err(GspError::Instability(format!(
                    "pole of modulus {radius} at lambda_{} = {}",
                    i + 1,
                    lambdas[i]
                )));
            }
        }
        Ok(spec)
    }

    /// Opinion dynamics as GF-AR(1): `A_1 = (1−β)(I − αL)`, `B_0 = βI`.
    pub fn opinion(alpha: f64, beta: f64, lambdas: &[f64]) -> Result<Self> {
        let a1 = FilterSpec::Polynomial {
            coeffs: vec![1.0 - beta, -(1.0 - beta) * alpha],
        };
        let b0 = FilterSpec::Polynomial { coeffs: vec![beta] };
        Self::new(vec![a1], vec![b0], lambdas)
    }

    /// Driven diffusion `y_t = e^{−σL} y_{t−1} + x_t`.
    ///
    /// The pole at `λ = 0` sits on the unit circle, so this is rejected as
    /// unstable on any spectrum containing zero (every Laplacian spectrum).
    pub fn diffusion(sigma: f64, lambdas: &[f64]) -> Result<Self> {
        Self::new(
            vec![FilterSpec::Diffusion { t_sigma: sigma }],
            vec![FilterSpec::identity()],
            lambdas,
        )
    }

    pub fn ar(&self) -> &[FilterSpec] {
        &self.ar
    }

    pub fn ma(&self) -> &[FilterSpec] {
        &self.ma
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Largest root modulus of `z^q − a_1 z^{q−1} − … − a_q` at eigenvalue `i`.
    fn pole_radius(&self, i: usize) -> f64 {
        let q = self.ar.len();
        if q == 0 {
            return 0.0;
        }
        let mut companion = DMatrix::zeros(q, q);
        for s in 0..q {
            companion[(0, s)] = self.ar_response[s][i];
        }
        for s in 1..q {
            companion[(s, s - 1)] = 1.0;
        }
        companion
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn index_of(&self, lambda: f64) -> Option<usize> {
        let scale = self.lambdas.iter().fold(1.0f64, |m, l| m.max(l.abs()));
        self.lambdas
            .iter()
            .position(|&l| (l - lambda).abs() <= LAMBDA_MATCH_TOL * scale)
    }

    fn taps_at(&self, lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if let Some(i) = self.index_of(lambda) {
            return Ok((
                self.ar_response.iter().map(|r| r[i]).collect(),
                self.ma_response.iter().map(|r| r[i]).collect(),
            ));
        }
        let top = *self.lambdas.last().expect("nonempty spectrum");
        let eval = |f: &FilterSpec| crate::filters::response_at(f, lambda, top);
        Ok((
            self.ar.iter().map(eval).collect::<Result<_>>()?,
            self.ma.iter().map(eval).collect::<Result<_>>()?,
        ))
    }
}

fn transfer_from_taps(ar: &[f64], ma: &[f64], z: Complex64) -> Result<Complex64> {
    let zinv = z.inv();
    let mut a = Complex64::new(1.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for &coef in ar {
        power *= zinv;
        a -= power * coef;
    }
    let mut b = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for &coef in ma {
        b += power * coef;
        power *= zinv;
    }
    if a.norm() <= 1e-14 * (1.0 + ar.iter().map(|c| c.abs()).sum::<f64>()) {
        return Err(GspError::Singularity(format!("ã(z) vanishes at z = {z}")));
    }
    Ok(b / a)
}

/// `ℍ(λ, z) = b̃(z)/ã(z)`.
///
/// `λ` is matched against the bound spectrum first, so index-based taps work
/// at the graph's eigenvalues; elsewhere only closed-form taps are accepted.
/// An infinite `z` returns `h_{B_0}(λ)`.
pub fn joint_transfer(spec: &GfArmaSpec, lambda: f64, z: Complex64) -> Result<Complex64> {
    let (ar, ma) = spec.taps_at(lambda)?;
    if z.re.is_infinite() || z.im.is_infinite() {
        return Ok(Complex64::new(ma[0], 0.0));
    }
    if z.norm() == 0.0 {
        return Err(GspError::Singularity("z = 0".into()));
    }
    transfer_from_taps(&ar, &ma, z)
}

/// Runs the recursion from zero initial conditions.
///
/// The input is moved to the graph frequency domain where each eigenvalue
/// gives an independent scalar ARMA recursion.
pub fn simulate_gfarma(
    basis: &SpectralBasis,
    spec: &GfArmaSpec,
    x: &TrajectoryMatrix,
) -> Result<TrajectoryMatrix> {
    let n = basis.n();
    check_dim(n, spec.lambdas.len())?;
    check_dim(n, x.nrows())?;
    let scale = basis.lambda_max().abs().max(1.0);
    if basis
        .lambdas()
        .iter()
        .zip(&spec.lambdas)
        .any(|(a, b)| (a - b).abs() > 1e-9 * scale)
    {
        return Err(GspError::Validation(
            "GF-ARMA spec is bound to a different spectrum".into(),
        ));
    }
    let horizon = x.ncols();
    let xt = basis.vectors().tr_mul(x);
    let mut yt = DMatrix::zeros(n, horizon);
    for i in 0..n {
        for t in 0..horizon {
            let mut acc = 0.0;
            for (s, resp) in spec.ar_response.iter().enumerate() {
                if t > s {
                    acc += resp[i] * yt[(i, t - s - 1)];
                }
            }
            for (s, resp) in spec.ma_response.iter().enumerate() {
                if t >= s {
                    acc += resp[i] * xt[(i, t - s)];
                }
            }
            yt[(i, t)] = acc;
        }
    }
    Ok(basis.vectors() * yt)
}

/// Temporal low-pass ratio with the continuous `ω` ranges replaced by
/// `gridsize` uniformly spaced points on `[0, ω₀]` (low band) and on the open
/// interval `(ω₀, 2π)` (high band).
pub fn temporal_lowpass_ratio(
    spec: &GfArmaSpec,
    k: usize,
    omega0: f64,
    gridsize: usize,
) -> Result<f64> {
    let n = spec.lambdas.len();
    if k < 1 || k >= n {
        return Err(GspError::Parameter(format!(
            "bandwidth k = {k} must lie in [1, {}]",
            n.saturating_sub(1)
        )));
    }
    let two_pi = std::f64::consts::TAU;
    if !(omega0 > 0.0 && omega0 < two_pi) {
        return Err(GspError::Parameter(format!(
            "cutoff omega0 = {omega0} must lie in (0, 2π)"
        )));
    }
    if gridsize < 16 {
        return Err(GspError::Parameter(format!(
            "gridsize = {gridsize} must be at least 16"
        )));
    }
    let low_grid: Vec<f64> = (0..gridsize)
        .map(|j| omega0 * j as f64 / (gridsize - 1) as f64)
        .collect();
    let high_grid: Vec<f64> = (0..gridsize)
        .map(|j| omega0 + (two_pi - omega0) * (j + 1) as f64 / (gridsize + 1) as f64)
        .collect();
    let magnitude = |i: usize, w: f64| -> Result<f64> {
        let ar: Vec<f64> = spec.ar_response.iter().map(|r| r[i]).collect();
        let ma: Vec<f64> = spec.ma_response.iter().map(|r| r[i]).collect();
        Ok(transfer_from_taps(&ar, &ma, Complex64::from_polar(1.0, w))?.norm())
    };
    let mut low = f64::INFINITY;
    for i in 0..k {
        for &w in &low_grid {
            low = low.min(magnitude(i, w)?);
        }
    }
    let mut high: f64 = 0.0;
    for i in k..n {
        for &w in &high_grid {
            high = high.max(magnitude(i, w)?);
        }
    }
    if low == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(high / low)
}

/// Fixed point of `y ← (1−β)(I − αL)y + βx`: solves `(βI + (1−β)αL) y = βx`.
pub fn steady_state(
    l: &Laplacian,
    alpha: f64,
    beta: f64,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim(l.n(), x.len())?;
    if !(alpha > 0.0) {
        return Err(GspError::Parameter(format!(
            "alpha = {alpha} must be positive"
        )));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(GspError::Parameter(format!(
            "beta = {beta} must lie in (0, 1]"
        )));
    }
    let n = l.n();
    let system = DMatrix::identity(n, n) * beta + l.matrix() * ((1.0 - beta) * alpha);
    let chol = system.cholesky().ok_or_else(|| {
        GspError::Numerical("steady-state system is not positive definite".into())
    })?;
    Ok(chol.solve(&(x * beta)))
}

/// The resolvent parameter `α̃ = α(1−β)/β` of the opinion steady state.
pub fn opinion_resolvent_alpha(alpha: f64, beta: f64) -> f64 {
    alpha * (1.0 - beta) / beta
}

/// Iterates `y_{t+1} = (1−β)(I − αL)y_t + βx` from `y_0 = 0`.
pub fn iterate_opinion(
    l: &Laplacian,
    alpha: f64,
    beta: f64,
    x: &DVector<f64>,
    steps: usize,
) -> Result<DVector<f64>> {
    check_dim(l.n(), x.len())?;
    let mut y = DVector::zeros(l.n());
    for _ in 0..steps {
        let shifted = l.matrix() * &y;
        y = (&y - shifted * alpha) * (1.0 - beta) + x * beta;
    }
    Ok(y)
}
