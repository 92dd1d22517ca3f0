//! Thin wrappers over `faer` for the dense kernels used by the model.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};

use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: Mat<f64>,
}

pub fn sym_eigen(m: MatRef<'_, f64>) -> Result<SymEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension { expected: m.nrows(), got: m.ncols() });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(SymEigen { values: Vec::new(), vectors: Mat::zeros(0, 0) });
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed on {n}x{n}: {e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite eigenvalue in {n}x{n} problem")));
    }
    let mut vectors = evd.U().to_owned();
    polish_orthogonal(&mut vectors);
    Ok(SymEigen { values, vectors })
}

/// Newton–Schulz refinement `Q ← Q + Q(I − QᵀQ)/2` of a nearly orthogonal matrix.
fn polish_orthogonal(q: &mut Mat<f64>) {
    let n = q.ncols();
    for _ in 0..2 {
        let mut defect = mul(q.transpose(), q.as_ref());
        for i in 0..n {
            defect[(i, i)] -= 1.0;
        }
        if max_abs(defect.as_ref()) == 0.0 {
            return;
        }
        let correction = mul(q.as_ref(), defect.as_ref());
        for j in 0..n {
            for i in 0..q.nrows() {
                q[(i, j)] -= 0.5 * correction[(i, j)];
            }
        }
    }
}

/// `dst = lhs * rhs`
pub fn mul_into(mut dst: faer::MatMut<'_, f64>, lhs: MatRef<'_, f64>, rhs: MatRef<'_, f64>) {
    matmul(dst.as_mut(), Accum::Replace, lhs, rhs, 1.0, Par::Seq);
}

pub fn mul(lhs: MatRef<'_, f64>, rhs: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::zeros(lhs.nrows(), rhs.ncols());
    mul_into(out.as_mut(), lhs, rhs);
    out
}

/// Largest absolute entry.
pub fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

/// Overwrite the upper triangle with the lower one so the matrix is exactly symmetric.
pub fn symmetrize_from_lower(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = m[(i, j)];
            m[(j, i)] = v;
        }
    }
}
