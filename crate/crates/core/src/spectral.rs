//! Laplacian eigendecomposition, the graph Fourier transform and the graph
//! quadratic form.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, GspError, Result};
use crate::graph::{Graph, Laplacian};

/// Orthonormal eigenvectors (columns) and ascending eigenvalues of a Laplacian.
///
/// Each eigenvector's sign is fixed so that its largest-magnitude entry is
/// positive (first such entry on ties). Repeated eigenvalues are allowed, in
/// which case only the spanned subspaces are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    vectors: DMatrix<f64>,
    lambdas: DVector<f64>,
}

impl SpectralBasis {
    /// Wraps precomputed eigenpairs after checking shape and ordering.
    pub fn from_parts(vectors: DMatrix<f64>, lambdas: DVector<f64>) -> Result<Self> {
        let n = lambdas.len();
        if vectors.nrows() != n || vectors.ncols() != n {
            return Err(GspError::Dimension {
                expected: n,
                found: vectors.ncols(),
            });
        }
        if lambdas
            .iter()
            .zip(lambdas.iter().skip(1))
            .any(|(a, b)| b < a)
        {
            return Err(GspError::Validation(
                "eigenvalues must be sorted ascending".into(),
            ));
        }
        Ok(Self { vectors, lambdas })
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// The matrix `U`.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn lambdas(&self) -> &DVector<f64> {
        &self.lambdas
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambdas[self.n() - 1]
    }

    /// `U_k`, the eigenvectors of the `k` smallest eigenvalues.
    pub fn low_band(&self, k: usize) -> DMatrix<f64> {
        self.vectors.columns(0, k.min(self.n())).into_owned()
    }

    /// Eigenvectors `k+1 … n`.
    pub fn high_band(&self, k: usize) -> DMatrix<f64> {
        let k = k.min(self.n());
        self.vectors.columns(k, self.n() - k).into_owned()
    }

    /// Projector `U_k U_kᵀ` onto the bottom-`k` eigenspace.
    pub fn low_band_projector(&self, k: usize) -> DMatrix<f64> {
        let uk = self.low_band(k);
        &uk * uk.transpose()
    }

    /// `U · Diag(response) · Uᵀ`.
    pub fn synthesize_operator(&self, response: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.n(), response.len())?;
        let mut scaled = self.vectors.clone();
        for (mut col, &h) in scaled.column_iter_mut().zip(response) {
            col *= h;
        }
        Ok(scaled * self.vectors.transpose())
    }
}

/// Eigendecomposition of a symmetric matrix with ascending eigenvalues and
/// deterministic eigenvector signs.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(GspError::Validation("matrix must be square".into()));
    }
    let scale = matrix.amax().max(1.0);
    if (matrix - matrix.transpose()).amax() > 1e-10 * scale {
        return Err(GspError::Validation("matrix is not symmetric".into()));
    }
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    if matrix.iter().all(|&v| v == 0.0) {
        return Ok((DVector::zeros(n), DMatrix::identity(n, n)));
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lambdas = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok((lambdas, vectors))
}

fn fix_sign(col: &mut DVector<f64>) {
    let peak = col.amax();
    if peak == 0.0 {
        return;
    }
    let pivot = col
        .iter()
        .position(|v| v.abs() >= peak * (1.0 - 1e-9))
        .unwrap_or(0);
    if col[pivot] < 0.0 {
        col.neg_mut();
    }
}

/// `L = U Λ Uᵀ` with eigenvalues sorted ascending.
pub fn eigendecompose(l: &Laplacian) -> Result<SpectralBasis> {
    let (lambdas, vectors) = symmetric_eigen(l.matrix())?;
    Ok(SpectralBasis { vectors, lambdas })
}

/// Graph Fourier transform `Uᵀx`.
pub fn gft(basis: &SpectralBasis, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(basis.n(), x.len())?;
    Ok(basis.vectors.tr_mul(x))
}

/// Inverse transform `U·x̃`.
pub fn igft(basis: &SpectralBasis, xt: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(basis.n(), xt.len())?;
    Ok(&basis.vectors * xt)
}

/// `xᵀLx`.
pub fn quadratic_form(l: &Laplacian, x: &DVector<f64>) -> Result<f64> {
    check_dim(l.n(), x.len())?;
    Ok(x.dot(&(l.matrix() * x)))
}

/// `Σ_{i<j} A_ij (x_i − x_j)²`, equal to `xᵀLx` for `L = D − A`.
pub fn quadratic_form_edges(g: &Graph, x: &DVector<f64>) -> Result<f64> {
    let n = g.n();
    check_dim(n, x.len())?;
    let w = g.weights();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = x[i] - x[j];
            total += w[(i, j)] * d * d;
        }
    }
    Ok(total)
}
