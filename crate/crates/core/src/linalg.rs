//! Thin wrappers over nalgebra factorisations with string diagnostics.

use alloc::format;
use alloc::string::String;

use nalgebra::DMatrix;

use crate::{CMatrix, CVector};

/// Solves `A·x = b` for Hermitian positive-definite `A` by Cholesky.
pub(crate) fn solve_hpd(a: CMatrix, b: &CVector) -> Result<CVector, String> {
    let n = a.nrows();
    match a.cholesky() {
        Some(ch) => Ok(ch.solve(b)),
        None => Err(format!("{n}x{n} normal matrix is not positive definite")),
    }
}

/// [`solve_hpd`] that also rejects a factor whose smallest pivot is below
/// `rcond` times its largest, i.e. a numerically rank-deficient `A`.
pub(crate) fn solve_hpd_checked(a: CMatrix, b: &CVector, rcond: f64) -> Result<CVector, String> {
    let n = a.nrows();
    let ch = a
        .cholesky()
        .ok_or_else(|| format!("{n}x{n} normal matrix is not positive definite"))?;
    let diag = ch.l_dirty().diagonal().map(|c| c.re);
    let max = diag.max();
    let min = diag.min();
    if !(min > rcond * max) {
        return Err(format!("{n}x{n} normal matrix is numerically rank deficient"));
    }
    Ok(ch.solve(b))
}

/// Inverse of a real symmetric positive-definite matrix, falling back to LU.
pub(crate) fn inverse_spd(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.inverse());
    }
    a.clone().try_inverse()
}
