//! Laplacian learning from smooth signals by alternating minimization of
//!
//! `(1/m) Σ_ℓ [ σ⁻²‖z_ℓ − y_ℓ‖² + z_ℓᵀ L z_ℓ ] + β‖L‖_F²`
//!
//! over `z_ℓ` and over Laplacians with `Tr(L) = n`. The Laplacian is
//! parametrized by its nonnegative edge weights `w`, for which the trace
//! constraint reads `1ᵀw = n/2` and the feasible set is a scaled simplex.

use nalgebra::DMatrix;

use crate::error::{GspError, Result};
use crate::graph::Laplacian;
use crate::processes::SignalMatrix;

/// Solver controls for [`learn_topology`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyOptions {
    /// Noise level in the data-fit term.
    pub sigma: f64,
    /// Frobenius regularization weight `β`.
    pub beta_reg: f64,
    pub max_iter: usize,
    /// Stop once the relative objective change drops below this.
    pub tol: f64,
    /// Projected-gradient iterations per Laplacian update.
    pub inner_iter: usize,
}

impl Default for TopologyOptions {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            beta_reg: 0.5,
            max_iter: 50,
            tol: 1e-6,
            inner_iter: 2000,
        }
    }
}

/// A Laplacian estimate with the objective value after each outer iteration.
#[derive(Debug, Clone)]
pub struct LearnedLaplacian {
    laplacian: Laplacian,
    weights: Vec<f64>,
    pub history: Vec<f64>,
    pub warnings: Vec<String>,
}

impl LearnedLaplacian {
    pub fn laplacian(&self) -> &Laplacian {
        &self.laplacian
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.laplacian.matrix()
    }

    /// Edge weights in row-major upper-triangular order `(0,1), (0,2), …`.
    pub fn edge_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        self.laplacian.adjacency()
    }
}

struct EdgeIndex {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl EdgeIndex {
    fn new(n: usize) -> Self {
        let pairs = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self { n, pairs }
    }

    fn degrees(&self, w: &[f64]) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        for (&(i, j), &we) in self.pairs.iter().zip(w) {
            deg[i] += we;
            deg[j] += we;
        }
        deg
    }

    fn laplacian(&self, w: &[f64]) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for (&(i, j), &we) in self.pairs.iter().zip(w) {
            l[(i, j)] = -we;
            l[(j, i)] = -we;
        }
        let deg = self.degrees(w);
        for i in 0..self.n {
            l[(i, i)] = deg[i];
        }
        l
    }

    /// `(1/m) Σ_ℓ (z_i − z_j)²` per edge.
    fn smoothness_costs(&self, z: &DMatrix<f64>) -> Vec<f64> {
        let m = z.ncols() as f64;
        self.pairs
            .iter()
            .map(|&(i, j)| {
                let diff = z.row(i) - z.row(j);
                diff.norm_squared() / m
            })
            .collect()
    }

    /// `dᵀw + β(Σ_i deg_i² + 2Σ_e w_e²)`, the Laplacian-dependent part of the objective.
    fn l_objective(&self, costs: &[f64], w: &[f64], beta: f64) -> f64 {
        let linear: f64 = costs.iter().zip(w).map(|(d, x)| d * x).sum();
        let deg = self.degrees(w);
        let frob =
            deg.iter().map(|d| d * d).sum::<f64>() + 2.0 * w.iter().map(|x| x * x).sum::<f64>();
        linear + beta * frob
    }
}

/// Euclidean projection onto `{w ≥ 0, Σw = total}`.
fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (idx, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - total) / (idx + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn full_objective(
    y: &SignalMatrix,
    z: &DMatrix<f64>,
    l: &DMatrix<f64>,
    sigma: f64,
    beta: f64,
) -> f64 {
    let m = y.ncols() as f64;
    let fit = (z - y).norm_squared() / (sigma * sigma);
    let smooth = (z.transpose() * l).component_mul(&z.transpose()).sum();
    (fit + smooth) / m + beta * l.norm_squared()
}

/// Alternating minimization for a smoothness-regularized Laplacian estimate.
///
/// The `z`-step solves `(I + σ²L)z_ℓ = y_ℓ` with one Cholesky factor shared by
/// all signals. The `L`-step runs projected gradient on the edge weights,
/// warm-started from the previous iterate with step `1/(4βn)`, which never
/// increases the objective. With `β = 0` the `L`-step is a linear program whose
/// minimizer puts all weight on the smoothest edge; that vertex is returned
/// and a warning recorded.
pub fn learn_topology(y: &SignalMatrix, options: &TopologyOptions) -> Result<LearnedLaplacian> {
    let TopologyOptions {
        sigma,
        beta_reg,
        max_iter,
        tol,
        inner_iter,
    } = *options;
    let n = y.nrows();
    if n < 2 {
        return Err(GspError::Parameter(
            "topology learning needs at least two nodes".into(),
        ));
    }
    if y.ncols() == 0 {
        return Err(GspError::Parameter(
            "topology learning needs at least one signal".into(),
        ));
    }
    if !(sigma > 0.0) {
        return Err(GspError::Parameter(format!(
            "sigma = {sigma} must be positive"
        )));
    }
    if !(beta_reg >= 0.0) {
        return Err(GspError::Parameter(format!(
            "beta_reg = {beta_reg} must be nonnegative"
        )));
    }
    if max_iter < 1 {
        return Err(GspError::Parameter("max_iter must be at least 1".into()));
    }
    let mut warnings = Vec::new();
    if beta_reg == 0.0 {
        warnings.push(
            "beta_reg = 0: the Laplacian step is a linear program and returns a single-edge vertex"
                .to_string(),
        );
    }
    let edges = EdgeIndex::new(n);
    let total = n as f64 / 2.0;
    let mut w = vec![total / edges.pairs.len() as f64; edges.pairs.len()];
    let step = if beta_reg > 0.0 {
        1.0 / (4.0 * beta_reg * n as f64)
    } else {
        0.0
    };
    let mut history = Vec::with_capacity(max_iter);
    let eye = DMatrix::<f64>::identity(n, n);
    for _ in 0..max_iter {
        let l = edges.laplacian(&w);
        let system = &eye + &l * (sigma * sigma);
        let chol = system
            .cholesky()
            .ok_or_else(|| GspError::Numerical("I + σ²L is not positive definite".into()))?;
        let z = chol.solve(y);

        let costs = edges.smoothness_costs(&z);
        if beta_reg == 0.0 {
            let best = costs
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .map(|(e, _)| e)
                .expect("n >= 2");
            let mut vertex = vec![0.0; w.len()];
            vertex[best] = total;
            if edges.l_objective(&costs, &vertex, 0.0) <= edges.l_objective(&costs, &w, 0.0) {
                w = vertex;
            }
        } else {
            let mut current = edges.l_objective(&costs, &w, beta_reg);
            for _ in 0..inner_iter {
                let deg = edges.degrees(&w);
                let grad: Vec<f64> = edges
                    .pairs
                    .iter()
                    .zip(&costs)
                    .zip(&w)
                    .map(|((&(i, j), d), we)| d + beta_reg * (2.0 * (deg[i] + deg[j]) + 4.0 * we))
                    .collect();
                let trial: Vec<f64> = w.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
                let next = project_simplex(&trial, total);
                let value = edges.l_objective(&costs, &next, beta_reg);
                if value > current {
                    break;
                }
                let moved: f64 = next
                    .iter()
                    .zip(&w)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                w = next;
                current = value;
                if moved <= 1e-13 * (1.0 + total) {
                    break;
                }
            }
        }

        let l = edges.laplacian(&w);
        let objective = full_objective(y, &z, &l, sigma, beta_reg);
        let done = history.last().is_some_and(|&prev: &f64| {
            (prev - objective).abs() <= tol * prev.abs().max(f64::MIN_POSITIVE)
        });
        history.push(objective);
        if done {
            break;
        }
    }
    let laplacian = Laplacian::from_matrix(edges.laplacian(&w), 1e-9)?;
    Ok(LearnedLaplacian {
        laplacian,
        weights: w,
        history,
        warnings,
    })
}

/// F1 score of the learned edge support against a reference adjacency.
///
/// Learned edges are those with weight above `rel_threshold` times the
/// largest learned weight; reference edges are the positive entries.
pub fn edge_support_f1(
    learned: &DMatrix<f64>,
    truth: &DMatrix<f64>,
    rel_threshold: f64,
) -> Result<f64> {
    let n = truth.nrows();
    if learned.shape() != truth.shape() {
        return Err(GspError::Dimension {
            expected: n,
            found: learned.nrows(),
        });
    }
    let max_w = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| learned[(i, j)])
        .fold(0.0, f64::max);
    let cut = rel_threshold * max_w;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            let predicted = max_w > 0.0 && learned[(i, j)] > cut;
            let actual = truth[(i, j)] > 0.0;
            match (predicted, actual) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}
