//! Direct solves and eigenvalue condition numbers.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::assembly::LinearSystem;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Largest matrix handled by [`condition_number`] unless overridden.
pub const DEFAULT_EIGEN_CAP: usize = 8192;

fn to_faer(a: &CsrMatrix) -> Result<SparseColMat<usize, f64>> {
    let t: Vec<Triplet<usize, usize, f64>> = a.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(a.nrows, a.ncols, &t)
        .map_err(|e| Error::SingularFactorization(format!("{e:?}")))
}

/// Sparse LU solve of `A x = b`.
pub fn solve_matrix(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::NonSquare(a.nrows, a.ncols));
    }
    if b.len() != a.nrows {
        return Err(Error::SizeMismatch { expected: a.nrows, found: b.len() });
    }
    let lu = to_faer(a)?.sp_lu().map_err(|e| Error::SingularFactorization(format!("{e:?}")))?;
    let rhs = Col::<f64>::from_fn(b.len(), |i| b[i]);
    let x = lu.solve(&rhs);
    let x: Vec<f64> = (0..b.len()).map(|i| x[i]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularFactorization("non-finite solution".into()));
    }
    Ok(x)
}

pub fn solve(sys: &LinearSystem) -> Result<Vec<f64>> {
    if sys.degenerate {
        return Err(Error::DegenerateUnsolvable);
    }
    solve_matrix(&sys.matrix, &sys.rhs)
}

/// Infinity-norm residual `‖A x - b‖∞`.
pub fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    a.matvec(x).iter().zip(b).fold(0.0, |m, (ax, bi)| m.max((ax - bi).abs()))
}

/// Eigenvalue moduli of a general real matrix, dense.
pub fn eigenvalue_moduli(a: &CsrMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::NonSquare(a.nrows, a.ncols));
    }
    let mut m = Mat::<f64>::zeros(a.nrows, a.ncols);
    for (i, j, v) in a.triplets() {
        m[(i, j)] = v;
    }
    let ev = m
        .eigenvalues()
        .map_err(|e| Error::SingularFactorization(format!("eigen solve: {e:?}")))?;
    Ok(ev.iter().map(|z| z.norm()).collect())
}

/// `max|λ| / min|λ|` over the full spectrum.
pub fn condition_number_matrix(a: &CsrMatrix, cap: usize) -> Result<f64> {
    if a.nrows > cap {
        return Err(Error::TooLarge(a.nrows, cap));
    }
    let ev = eigenvalue_moduli(a)?;
    let hi = ev.iter().copied().fold(0.0, f64::max);
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if lo <= hi * 1e-14 || lo == 0.0 {
        return Err(Error::ZeroEigenvalue);
    }
    Ok(hi / lo)
}

pub fn condition_number(sys: &LinearSystem) -> Result<f64> {
    if sys.degenerate {
        return Err(Error::DegenerateUnsolvable);
    }
    condition_number_matrix(&sys.matrix, DEFAULT_EIGEN_CAP)
}
