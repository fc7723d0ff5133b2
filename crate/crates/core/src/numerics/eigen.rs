//! Hermitian eigendecomposition and the PSD-cone helpers built on it.

use nalgebra::{Complex, DMatrix};

use super::scalar::eps;
use super::NumericsError;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn reconstruct(&self) -> CMatrix {
        self.rebuild(|l| l)
    }

    /// `V f(Λ) V†`.
    pub fn rebuild(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex::new(v, 0.0))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|m - m†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex::new(0.5, 0.0)
}

/// Tolerance scaled to the magnitude of `m`.
pub fn scaled_tol(m: &CMatrix) -> f64 {
    eps() * max_abs(m).max(1.0)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
pub fn eig_sym(m: &CMatrix) -> Result<Eigen, NumericsError> {
    if m.nrows() != m.ncols() {
        return Err(NumericsError::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let dev = hermitian_deviation(m);
    if dev > scaled_tol(m) {
        return Err(NumericsError::NotHermitian(dev));
    }
    Ok(eig_hermitian_unchecked(&hermitian_part(m)))
}

pub fn eig_real_sym(m: &DMatrix<f64>) -> Result<Eigen, NumericsError> {
    eig_sym(&from_real(m))
}

fn eig_hermitian_unchecked(h: &CMatrix) -> Eigen {
    let n = h.nrows();
    if n == 0 {
        return Eigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let se = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Eigen { values, vectors }
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clamped to zero.
pub fn psd_project(m: &CMatrix) -> CMatrix {
    eig_hermitian_unchecked(&hermitian_part(m)).rebuild(|l| l.max(0.0))
}

/// Split a Hermitian matrix into `(P, N)` with `m = P - N`, both PSD with orthogonal supports.
pub fn split_pos_neg(m: &CMatrix) -> (CMatrix, CMatrix) {
    let e = eig_hermitian_unchecked(&hermitian_part(m));
    (e.rebuild(|l| l.max(0.0)), e.rebuild(|l| (-l).max(0.0)))
}

/// `|m| = P + N` for the split above.
pub fn abs_part(m: &CMatrix) -> CMatrix {
    eig_hermitian_unchecked(&hermitian_part(m)).rebuild(f64::abs)
}

/// Principal square root of a PSD matrix; small negative eigenvalues are clamped.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    eig_hermitian_unchecked(&hermitian_part(m)).rebuild(|l| l.max(0.0).sqrt())
}

/// Moore-Penrose pseudoinverse with singular values below `tol` treated as zero.
pub fn pinv(m: &CMatrix, tol: f64) -> CMatrix {
    if m.is_empty() {
        return CMatrix::zeros(m.ncols(), m.nrows());
    }
    m.clone()
        .pseudo_inverse(tol)
        .unwrap_or_else(|_| CMatrix::zeros(m.ncols(), m.nrows()))
}

pub fn sigma_max(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64, NumericsError> {
    Ok(eig_sym(m)?.min())
}

pub fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn nuclear_norm_hermitian(m: &CMatrix) -> Result<f64, NumericsError> {
    Ok(eig_sym(m)?.values.iter().map(|l| l.abs()).sum())
}
