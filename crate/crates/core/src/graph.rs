//! Undirected weighted graphs, their combinatorial Laplacians and the random
//! graph models used to generate synthetic topologies.
//!
//! Graphs are stored as dense symmetric adjacency matrices. Sampled graphs may
//! be disconnected, so nothing downstream may assume `λ₂ > 0`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GspError, Result};

/// Absolute tolerance used when checking symmetry of user supplied matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// An undirected graph with nonnegative edge weights and no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
}

impl Graph {
    /// Validates and wraps an adjacency matrix.
    ///
    /// Entries `w_ij` and `w_ji` may differ by at most [`SYMMETRY_TOL`]; the
    /// stored matrix is the exact symmetrization.
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 {
            return Err(GspError::Validation(
                "graph must have at least one node".into(),
            ));
        }
        if weights.ncols() != n {
            return Err(GspError::Validation(format!(
                "adjacency must be square, got {}x{}",
                n,
                weights.ncols()
            )));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(GspError::Validation(format!("self-loop at node {i}")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(GspError::Validation(format!(
                        "non-finite weight at ({i}, {j})"
                    )));
                }
                if w < 0.0 {
                    return Err(GspError::Validation(format!(
                        "negative weight {w} at ({i}, {j})"
                    )));
                }
                if (w - weights[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(GspError::Validation(format!(
                        "adjacency is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let weights = (&weights + weights.transpose()) * 0.5;
        Ok(Self { weights })
    }

    /// Builds a graph from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for &(i, j, weight) in edges {
            if i >= n || j >= n {
                return Err(GspError::Validation(format!(
                    "edge ({i}, {j}) out of range for n = {n}"
                )));
            }
            if i == j {
                return Err(GspError::Validation(format!("self-loop at node {i}")));
            }
            w[(i, j)] = weight;
            w[(j, i)] = weight;
        }
        Self::new(w)
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n))
    }

    /// Unit-weight complete graph.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { 0.0 } else { 1.0 },
        ))
    }

    /// Unit-weight path `0 - 1 - … - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.weights.row_iter().map(|r| r.sum()))
    }

    /// Number of edges with strictly positive weight.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.weights[(i, j)] > 0.0)
            .count()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && self.weights[(i, j)] > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn laplacian(&self) -> Laplacian {
        laplacian(self)
    }
}

/// The combinatorial Laplacian `L = D - A`.
///
/// Symmetric with nonpositive off-diagonal entries and zero row sums. Positive
/// semidefiniteness follows from the first two properties and is not
/// re-checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    values: DMatrix<f64>,
}

impl Laplacian {
    /// Validates an arbitrary matrix as a graph Laplacian.
    ///
    /// `tol` bounds asymmetry, positive off-diagonal entries and row sums,
    /// scaled by the largest diagonal entry.
    pub fn from_matrix(values: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = values.nrows();
        if n == 0 || values.ncols() != n {
            return Err(GspError::Validation(format!(
                "Laplacian must be square and nonempty, got {}x{}",
                n,
                values.ncols()
            )));
        }
        let scale = values.diagonal().amax().max(1.0);
        let tol = tol * scale;
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                let v = values[(i, j)];
                if !v.is_finite() {
                    return Err(GspError::Validation(format!(
                        "non-finite entry at ({i}, {j})"
                    )));
                }
                if (v - values[(j, i)]).abs() > tol {
                    return Err(GspError::Validation(format!(
                        "Laplacian is not symmetric at ({i}, {j})"
                    )));
                }
                if i != j && v > tol {
                    return Err(GspError::Validation(format!(
                        "positive off-diagonal entry at ({i}, {j})"
                    )));
                }
                row_sum += v;
            }
            if row_sum.abs() > tol * n as f64 {
                return Err(GspError::Validation(format!(
                    "row {i} sums to {row_sum:e}, not zero"
                )));
            }
        }
        let values = (&values + values.transpose()) * 0.5;
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.values
    }

    pub fn trace(&self) -> f64 {
        self.values.trace()
    }

    /// Recovers the adjacency matrix `A = D - L`.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { -self.values[(i, j)] })
    }
}

/// `L = Diag(A·1) − A`. Rows sum to zero by construction.
pub fn laplacian(g: &Graph) -> Laplacian {
    let n = g.n();
    let mut values = -g.weights().clone();
    for i in 0..n {
        // Summing the off-diagonal entries of the negated row keeps L·1 = 0 exact.
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| values[(i, j)]).sum();
        values[(i, i)] = -off;
    }
    Laplacian { values }
}

/// Homogeneous planted partition model with `k` equal blocks.
///
/// Nodes are assigned to blocks contiguously: node `i` belongs to block
/// `i / (n / k)`. Within-block edges appear with probability `a + b`, cross-block
/// edges with probability `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockModel {
    n: usize,
    k: usize,
    a: f64,
    b: f64,
}

impl BlockModel {
    pub fn new(n: usize, k: usize, a: f64, b: f64) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(GspError::Parameter(
                "block model needs n >= 1 and k >= 1".into(),
            ));
        }
        if n % k != 0 {
            return Err(GspError::Parameter(format!(
                "n = {n} is not divisible by k = {k}; blocks must be equal-sized"
            )));
        }
        if !(a >= 0.0 && b >= 0.0) {
            return Err(GspError::Parameter(format!(
                "a = {a} and b = {b} must be nonnegative"
            )));
        }
        if a + b > 1.0 {
            return Err(GspError::Parameter(format!("a + b = {} exceeds 1", a + b)));
        }
        Ok(Self { n, k, a, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn block_size(&self) -> usize {
        self.n / self.k
    }

    /// Zero-based block label of every node.
    pub fn membership(&self) -> Vec<usize> {
        let size = self.block_size();
        (0..self.n).map(|i| i / size).collect()
    }

    /// The `n × k` binary membership matrix `Z`.
    pub fn membership_matrix(&self) -> DMatrix<f64> {
        let labels = self.membership();
        DMatrix::from_fn(
            self.n,
            self.k,
            |i, q| if labels[i] == q { 1.0 } else { 0.0 },
        )
    }

    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        let size = self.block_size();
        if i / size == j / size {
            self.a + self.b
        } else {
            self.b
        }
    }
}

/// Draws an SBM-PPM graph with independent upper-triangular Bernoulli entries.
pub fn sbm_ppm_sample(model: &BlockModel, seed: u64) -> Graph {
    let n = model.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < model.edge_probability(i, j) {
                w[(i, j)] = 1.0;
                w[(j, i)] = 1.0;
            }
        }
    }
    Graph { weights: w }
}

/// Closed-form expected Laplacian `(n(a+kb)/k)·I − Z(b·11ᵀ + a·I)Zᵀ`.
///
/// Its spectrum is `0`, `nb` (multiplicity `k−1`) and `na/k + nb`
/// (multiplicity `n−k`), so `λ_{k+1} − λ_k = na/k`.
pub fn expected_laplacian_sbm(model: &BlockModel) -> Laplacian {
    let (n, k, a, b) = (model.n() as f64, model.k() as f64, model.a(), model.b());
    let z = model.membership_matrix();
    let latent = DMatrix::from_element(model.k(), model.k(), b)
        + DMatrix::identity(model.k(), model.k()) * a;
    let mean_adjacency = &z * latent * z.transpose();
    let values = DMatrix::identity(model.n(), model.n()) * (n * (a + k * b) / k) - mean_adjacency;
    Laplacian { values }
}

/// Erdős–Rényi graph with independent `Bernoulli(p)` edges.
pub fn erdos_renyi_sample(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GspError::Parameter(format!(
            "edge probability {p} is not in [0, 1]"
        )));
    }
    if n == 0 {
        return Err(GspError::Parameter(
            "graph must have at least one node".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                w[(i, j)] = 1.0;
                w[(j, i)] = 1.0;
            }
        }
    }
    Ok(Graph { weights: w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_edge_laplacian() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let l = laplacian(&g);
        assert_eq!(
            l.matrix(),
            &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
    }

    #[test]
    fn edgeless_laplacian_is_zero() {
        for n in [1, 3, 7] {
            let l = laplacian(&Graph::empty(n).unwrap());
            assert_eq!(l.matrix(), &DMatrix::zeros(n, n));
        }
    }

    #[test]
    fn triangle_laplacian() {
        let l = laplacian(&Graph::complete(3).unwrap());
        let j = DMatrix::from_element(3, 3, 1.0);
        let i = DMatrix::identity(3, 3);
        let expected = &i * 2.0 - (j - &i);
        assert_eq!(l.matrix(), &expected);
    }

    #[test]
    fn rejects_bad_adjacency() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(Graph::new(asym), Err(GspError::Validation(_))));
        let neg = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(matches!(Graph::new(neg), Err(GspError::Validation(_))));
        let looped = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        assert!(Graph::new(looped).is_err());
        assert!(Graph::new(DMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn laplacian_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(Laplacian::from_matrix(bad, 1e-9).is_err());
        let good = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(Laplacian::from_matrix(good, 1e-9).is_ok());
    }

    #[test]
    fn block_model_validation() {
        assert!(BlockModel::new(10, 3, 0.1, 0.1).is_err());
        assert!(BlockModel::new(10, 2, 0.8, 0.3).is_err());
        assert!(BlockModel::new(10, 2, -0.1, 0.3).is_err());
        let m = BlockModel::new(6, 3, 0.5, 0.1).unwrap();
        assert_eq!(m.membership(), vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn sbm_extremes() {
        let full = sbm_ppm_sample(&BlockModel::new(12, 3, 0.0, 1.0).unwrap(), 3);
        assert_eq!(full, Graph::complete(12).unwrap());
        let none = sbm_ppm_sample(&BlockModel::new(12, 3, 0.0, 0.0).unwrap(), 3);
        assert_eq!(none, Graph::empty(12).unwrap());
    }

    #[test]
    fn sbm_is_seeded() {
        let m = BlockModel::new(40, 4, 0.4, 0.1).unwrap();
        assert_eq!(sbm_ppm_sample(&m, 11), sbm_ppm_sample(&m, 11));
        assert_ne!(sbm_ppm_sample(&m, 11), sbm_ppm_sample(&m, 12));
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(
            erdos_renyi_sample(9, 0.0, 1).unwrap(),
            Graph::empty(9).unwrap()
        );
        assert_eq!(
            erdos_renyi_sample(9, 1.0, 1).unwrap(),
            Graph::complete(9).unwrap()
        );
        assert!(erdos_renyi_sample(9, 1.5, 1).is_err());
    }

    #[test]
    fn expected_laplacian_rows_sum_to_zero() {
        let m = BlockModel::new(8, 2, 0.5, 0.25).unwrap();
        let l = expected_laplacian_sbm(&m);
        for r in l.matrix().row_iter() {
            assert_abs_diff_eq!(r.sum(), 0.0, epsilon = 1e-12);
        }
        assert!(Laplacian::from_matrix(l.matrix().clone(), 1e-12).is_ok());
    }

    #[test]
    fn connectivity() {
        assert!(Graph::path(5).unwrap().is_connected());
        assert!(!Graph::empty(3).unwrap().is_connected());
        assert!(Graph::empty(1).unwrap().is_connected());
    }
}
