use nalgebra::Schur;
use num_complex::Complex64;

use super::{ensure_finite, to_complex, CMat, Mat};
use crate::error::{Error, Result};

const SCHUR_MAX_ITER: usize = 10_000;

fn complex_schur(m: &Mat) -> Result<(CMat, CMat)> {
    Schur::try_new(to_complex(m), f64::EPSILON, SCHUR_MAX_ITER)
        .map(|s| s.unpack())
        .ok_or_else(|| Error::Numerical("complex Schur iteration did not converge".into()))
}

/// Solves `A X + X B = C` by reducing both coefficients to complex
/// triangular Schur form and back-substituting column by column. If the
/// Schur route fails or leaves a large residual, the Kronecker system is
/// solved directly instead.
pub fn solve_sylvester(a: &Mat, b: &Mat, c: &Mat) -> Result<Mat> {
    let attempt = sylvester_schur(a, b, c);
    if let Err(Error::Dimension(_) | Error::Input(_) | Error::SingularSylvester { .. }) = attempt {
        return attempt;
    }
    if let Ok(x) = &attempt {
        let resid = (a * x + x * b - c).norm();
        if resid <= 1e-10 * (1.0 + (a.norm() + b.norm()) * x.norm() + c.norm()) {
            return attempt;
        }
    }
    sylvester_kronecker(a, b, c)
}

/// `(I (x) A + B^T (x) I) vec X = vec C` by LU with full pivoting.
fn sylvester_kronecker(a: &Mat, b: &Mat, c: &Mat) -> Result<Mat> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut k = Mat::zeros(n * m, n * m);
    for j in 0..m {
        k.view_mut((j * n, j * n), (n, n)).copy_from(a);
        for l in 0..m {
            for i in 0..n {
                k[(j * n + i, l * n + i)] += b[(l, j)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_column_slice(c.as_slice());
    let x = k
        .full_piv_lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("Sylvester operator is singular".into()))?;
    Ok(Mat::from_column_slice(n, m, x.as_slice()))
}

fn sylvester_schur(a: &Mat, b: &Mat, c: &Mat) -> Result<Mat> {
    let (n, m) = (a.nrows(), b.nrows());
    if !a.is_square() || !b.is_square() || c.shape() != (n, m) {
        return Err(Error::Dimension(format!(
            "Sylvester equation with A {:?}, B {:?}, C {:?}",
            a.shape(),
            b.shape(),
            c.shape()
        )));
    }
    ensure_finite(a, "A")?;
    ensure_finite(b, "B")?;
    ensure_finite(c, "C")?;
    if n == 0 || m == 0 {
        return Ok(Mat::zeros(n, m));
    }
    let (u, ta) = complex_schur(a)?;
    let (v, tb) = complex_schur(b)?;
    let f = u.adjoint() * to_complex(c) * &v;
    let scale = 1.0 + a.norm() + b.norm();
    let mut y = CMat::zeros(n, m);
    for j in 0..m {
        let mut rhs = f.column(j).into_owned();
        for k in 0..j {
            let t = tb[(k, j)];
            if t != Complex64::new(0.0, 0.0) {
                rhs -= y.column(k) * t;
            }
        }
        let shift = tb[(j, j)];
        // upper-triangular solve of (Ta + shift I) y = rhs
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for l in i + 1..n {
                acc -= ta[(i, l)] * y[(l, j)];
            }
            let diag = ta[(i, i)] + shift;
            if diag.norm() <= 1e-12 * scale {
                return Err(Error::SingularSylvester { sum: diag });
            }
            y[(i, j)] = acc / diag;
        }
    }
    let x = u * y * v.adjoint();
    Ok(x.map(|z| z.re))
}

/// Solves `A^T P + P A + Q = 0` for symmetric `P`.
///
/// One step of iterative refinement is applied to the residual.
pub fn solve_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    if !a.is_square() || q.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "Lyapunov equation with A {:?}, Q {:?}",
            a.shape(),
            q.shape()
        )));
    }
    let at = a.transpose();
    let mut p = solve_sylvester(&at, a, &(-q))?;
    p = (&p + p.transpose()) * 0.5;
    let resid = &at * &p + &p * a + q;
    if resid.norm() > 0.0 {
        let dp = solve_sylvester(&at, a, &(-resid))?;
        p += (&dp + dp.transpose()) * 0.5;
    }
    Ok(p)
}
