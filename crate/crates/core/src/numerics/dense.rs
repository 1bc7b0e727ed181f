//! Decompositions delegated to faer. Storage stays in nalgebra; matrices
//! are copied across at the boundary.

use faer::Mat as FMat;
use num_complex::Complex64;

use super::{CMat, Mat};
use crate::error::{Error, Result};

fn to_faer(m: &Mat) -> FMat<f64> {
    FMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn to_faer_c(m: &CMat) -> FMat<Complex64> {
    FMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn svd_error<E: std::fmt::Debug>(e: E) -> Error {
    Error::Numerical(format!("SVD did not converge: {e:?}"))
}

/// Singular values in decreasing order.
pub(crate) fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    to_faer(m).singular_values().map_err(svd_error)
}

pub(crate) fn complex_singular_values(m: &CMat) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    to_faer_c(m).singular_values().map_err(svd_error)
}

/// Full square left factor `U` and singular values (decreasing).
pub(crate) fn left_singular(m: &Mat) -> Result<(Mat, Vec<f64>)> {
    let svd = to_faer(m).svd().map_err(svd_error)?;
    let u = svd.U();
    let s = svd.S().column_vector().iter().copied().collect();
    Ok((Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]), s))
}

pub(crate) fn complex_left_singular(m: &CMat) -> Result<(CMat, Vec<f64>)> {
    let svd = to_faer_c(m).svd().map_err(svd_error)?;
    let u = svd.U();
    let s = svd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((CMat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]), s))
}

/// Minimum-norm least-squares solution of `A X = B`, discarding singular
/// values at or below `rcond * sigma_max`.
pub(crate) fn lstsq(a: &Mat, b: &Mat, rcond: f64) -> Result<Mat> {
    let svd = to_faer(a).thin_svd().map_err(svd_error)?;
    let (u, v) = (svd.U(), svd.V());
    let s: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let top = s.first().copied().unwrap_or(0.0);
    let u = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]);
    let v = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]);
    let mut coef = u.transpose() * b;
    for (i, &si) in s.iter().enumerate() {
        let scale = if si > rcond * top { 1.0 / si } else { 0.0 };
        coef.row_mut(i).scale_mut(scale);
    }
    Ok(v * coef)
}

pub(crate) fn eigenvalues(m: &Mat) -> Result<Vec<Complex64>> {
    to_faer(m)
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigenvalue iteration did not converge: {e:?}")))
}
