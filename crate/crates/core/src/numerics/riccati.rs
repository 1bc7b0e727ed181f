//! Stabilizing state-feedback gains from the identity-weighted LQR Riccati
//! equation `A^T P + P A - P B B^T P + I = 0`, `F = -B^T P`.
//!
//! The stable invariant subspace of the Hamiltonian is extracted with the
//! scaled Newton iteration for the matrix sign function, then polished by a
//! couple of Newton-Kleinman steps. If that fails (e.g. a badly conditioned
//! Hamiltonian) the gain falls back to Newton-Kleinman seeded by a Bass
//! shift gain on the controllable part.

use num_complex::Complex64;

use super::{
    block, controllability_staircase, eigenvalues, solve_lyapunov, solve_sylvester,
    spectral_abscissa, Mat, Tolerances,
};
use crate::error::{Error, Result};

const SIGN_MAX_ITER: usize = 100;
const KLEINMAN_MAX_ITER: usize = 60;

/// Distinct eigenvalues with real part at least `-margin` and nonnegative
/// imaginary part. Nearby eigenvalues are merged into their mean, which is
/// far better conditioned than the individual members of a cluster.
pub(crate) fn unstable_modes(a: &Mat, margin: f64) -> Result<Vec<Complex64>> {
    let eig = eigenvalues(a)?;
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for z in eig {
        if z.re < -margin || z.im < -1e-10 * z.norm().max(1.0) {
            continue;
        }
        let tol = 1e-6 * z.norm().max(1.0);
        match clusters
            .iter_mut()
            .find(|c| (c.iter().sum::<Complex64>() / c.len() as f64 - z).norm() <= tol)
        {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|c| {
            let mean = c.iter().sum::<Complex64>() / c.len() as f64;
            if mean.im.abs() <= 1e-12 * mean.norm().max(1.0) {
                Complex64::new(mean.re, 0.0)
            } else {
                mean
            }
        })
        .collect())
}

/// PBH rank defects of `[A - lambda I, B]` over the closed right half-plane
/// (shifted left by the Hurwitz margin). Each entry is an eigenvalue and the
/// rank deficiency at that eigenvalue.
pub(crate) fn pbh_defects(a: &Mat, b: &Mat, tol: &Tolerances) -> Result<Vec<(Complex64, usize)>> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "PBH test with A {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut out = Vec::new();
    for lambda in unstable_modes(a, tol.hurwitz_margin)? {
        let mut m = super::CMat::zeros(n, n + b.ncols());
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(a[(i, j)], 0.0);
            }
            m[(i, i)] -= lambda;
            for j in 0..b.ncols() {
                m[(i, n + j)] = Complex64::new(b[(i, j)], 0.0);
            }
        }
        let rank = super::complex_numerical_rank(&m, tol);
        if rank < n {
            out.push((lambda, n - rank));
        }
    }
    Ok(out)
}

fn log_abs_det(m: &Mat) -> Option<f64> {
    let lu = m.clone().lu();
    let u = lu.u();
    let mut acc = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)].abs();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        acc += d.ln();
    }
    Some(acc)
}

/// Stabilizing solution of `A^T P + P A - P B B^T P + I = 0` through the
/// matrix sign function of the Hamiltonian.
pub fn care_identity_weights(a: &Mat, b: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let g = b * b.transpose();
    let ident = Mat::identity(n, n);
    let mut z = block(&[&[a, &(-&g)], &[&(-&ident), &(-a.transpose())]]);
    let dim = 2 * n;
    let mut converged = false;
    for _ in 0..SIGN_MAX_ITER {
        let logdet = log_abs_det(&z)
            .ok_or_else(|| Error::Numerical("Hamiltonian has an eigenvalue on the imaginary axis".into()))?;
        let c = (-logdet / dim as f64).exp();
        let zc = &z * c;
        let inv = zc
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("sign iteration hit a singular matrix".into()))?;
        let next = (zc + inv) * 0.5;
        let change = (&next - &z).norm();
        let scale = next.norm();
        z = next;
        if change <= 1e-12 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("matrix sign iteration did not converge".into()));
    }
    // (W + I) [I; P] = 0  =>  [W12; W22 + I] P = -[W11 + I; W21]
    let w11 = z.view((0, 0), (n, n)).into_owned();
    let w12 = z.view((0, n), (n, n)).into_owned();
    let w21 = z.view((n, 0), (n, n)).into_owned();
    let w22 = z.view((n, n), (n, n)).into_owned();
    let lhs = block(&[&[&w12], &[&(w22 + &ident)]]);
    let rhs = -block(&[&[&(w11 + &ident)], &[&w21]]);
    let p = super::dense::lstsq(&lhs, &rhs, 1e-14)?;
    Ok((&p + p.transpose()) * 0.5)
}

/// Newton-Kleinman iteration from a stabilizing initial gain.
fn newton_kleinman(a: &Mat, b: &Mat, f0: Mat, max_iter: usize) -> Result<Mat> {
    let n = a.nrows();
    let ident = Mat::identity(n, n);
    let mut f = f0;
    let mut prev: Option<Mat> = None;
    for _ in 0..max_iter {
        let acl = a + b * &f;
        let q = &ident + f.transpose() * &f;
        let p = solve_lyapunov(&acl, &q)?;
        f = -b.transpose() * &p;
        if let Some(pp) = &prev {
            if (&p - pp).norm() <= 1e-13 * p.norm().max(1.0) {
                break;
            }
        }
        prev = Some(p);
    }
    Ok(f)
}

/// Bass shift gain on the controllable part; zero on the uncontrollable part.
fn bass_gain(a: &Mat, b: &Mat, tol: &Tolerances) -> Result<Mat> {
    let n = a.nrows();
    let st = controllability_staircase(a, b, tol)?;
    let r = st.dim;
    let nu = n - r;
    let mut f = Mat::zeros(b.ncols(), n);
    if r == 0 {
        return Ok(f);
    }
    let ac = st.a.view((nu, nu), (r, r)).into_owned();
    let bc = st.port.rows(nu, r).into_owned();
    let beta = ac.norm() + 1.0;
    let shifted = &ac + Mat::identity(r, r) * beta;
    let z = solve_sylvester(&shifted, &shifted.transpose(), &(&bc * bc.transpose() * 2.0))?;
    let zinv = z
        .try_inverse()
        .ok_or_else(|| Error::Numerical("Bass Gramian is singular".into()))?;
    let fc = -bc.transpose() * zinv;
    let t_c = st.transform.columns(nu, r).transpose();
    f += fc * t_c;
    Ok(f)
}

/// Gain `F` with `A + B F` Hurwitz. A pair that is already Hurwitz gets the
/// zero gain; otherwise the LQR gain with identity weights.
pub fn stabilizing_gain(a: &Mat, b: &Mat, tol: &Tolerances) -> Result<Mat> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "gain for A {:?} and B {:?}",
            a.shape(),
            b.shape()
        )));
    }
    super::ensure_finite(a, "A")?;
    super::ensure_finite(b, "B")?;
    let m = b.ncols();
    if n == 0 || spectral_abscissa(a)? < -tol.hurwitz_margin {
        return Ok(Mat::zeros(m, n));
    }
    if let Some(&(eigenvalue, _)) = pbh_defects(a, b, tol)?.first() {
        return Err(Error::Unstabilizable { eigenvalue });
    }
    let stable = |f: &Mat| -> bool {
        spectral_abscissa(&(a + b * f))
            .map(|s| s < -tol.hurwitz_margin)
            .unwrap_or(false)
    };
    if let Ok(p) = care_identity_weights(a, b) {
        let f = -b.transpose() * p;
        if stable(&f) {
            let polished = newton_kleinman(a, b, f.clone(), 2)?;
            return Ok(if stable(&polished) { polished } else { f });
        }
    }
    let seed = bass_gain(a, b, tol)?;
    if !stable(&seed) {
        return Err(Error::Numerical("Bass shift gain is not stabilizing".into()));
    }
    let f = newton_kleinman(a, b, seed.clone(), KLEINMAN_MAX_ITER)?;
    if stable(&f) {
        Ok(f)
    } else {
        Ok(seed)
    }
}

/// Observer gain `L` with `A + L C` Hurwitz, by duality.
pub fn observer_gain(a: &Mat, c: &Mat, tol: &Tolerances) -> Result<Mat> {
    if c.ncols() != a.nrows() {
        return Err(Error::Dimension(format!(
            "observer gain for A {:?} and C {:?}",
            a.shape(),
            c.shape()
        )));
    }
    Ok(stabilizing_gain(&a.transpose(), &c.transpose(), tol)?.transpose())
}
