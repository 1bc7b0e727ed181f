//! Dense numerical substrate.
//!
//! Everything here works on `nalgebra::DMatrix<f64>` (or its complex
//! counterpart) and is sized for desk-scale problems: tens of states, not
//! thousands. Zero-dimensional matrices are accepted everywhere.

mod dense;
mod lyapunov;
pub(crate) mod riccati;
mod staircase;

pub use lyapunov::{solve_lyapunov, solve_sylvester};
pub use riccati::{care_identity_weights, observer_gain, stabilizing_gain};
pub use staircase::{controllability_staircase, observability_staircase, StaircaseResult};
pub(crate) use dense::complex_left_singular;

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Numerical thresholds shared by every decision the toolkit makes.
///
/// Rank decisions use the cutoff `rank_tol * max(1, sigma_max)`, so the
/// threshold is relative for large matrices and absolute for small ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub hurwitz_margin: f64,
    pub match_tol: f64,
    /// Seed for the extra pseudorandom probe points used in transfer-matrix
    /// comparisons.
    pub probe_seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-8,
            hurwitz_margin: 1e-8,
            match_tol: 1e-7,
            probe_seed: 0,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("hurwitz_margin", self.hurwitz_margin),
            ("match_tol", self.match_tol),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Input(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        Ok(())
    }

    /// Singular-value cutoff for a matrix whose largest singular value is
    /// `sigma_max`.
    pub fn rank_cutoff(&self, sigma_max: f64) -> f64 {
        self.rank_tol * sigma_max.max(1.0)
    }
}

pub(crate) fn ensure_finite(m: &Mat, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} has non-finite entries")))
    }
}

/// All eigenvalues, sorted by real part and then imaginary part.
pub fn eigenvalues(m: &Mat) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    ensure_finite(m, "matrix")?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut eig = dense::eigenvalues(m)?;
    sort_complex(&mut eig);
    Ok(eig)
}

pub(crate) fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Largest real part of the spectrum; `-inf` for an empty matrix.
pub fn spectral_abscissa(m: &Mat) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv = dense::singular_values(m).expect("SVD of a finite matrix");
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn complex_singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv = dense::complex_singular_values(m).expect("SVD of a finite matrix");
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn rank_from(sv: &[f64], tol: &Tolerances) -> usize {
    let cutoff = tol.rank_cutoff(sv.first().copied().unwrap_or(0.0));
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Number of singular values above the relative cutoff.
pub fn numerical_rank(m: &Mat, tol: &Tolerances) -> usize {
    rank_from(&singular_values(m), tol)
}

pub fn complex_numerical_rank(m: &CMat, tol: &Tolerances) -> usize {
    rank_from(&complex_singular_values(m), tol)
}

/// Orthonormal basis of the range of `m` plus its orthogonal complement,
/// as `(u, rank)` with `u` square orthogonal. Rank uses an explicit cutoff.
pub(crate) fn range_basis(m: &Mat, cutoff: f64) -> (Mat, usize) {
    let n = m.nrows();
    if n == 0 {
        return (Mat::zeros(0, 0), 0);
    }
    if m.ncols() == 0 {
        return (Mat::identity(n, n), 0);
    }
    let (u, sv) = dense::left_singular(m).expect("SVD of a finite matrix");
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    (u, rank)
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|v| Complex::new(v, 0.0))
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, &v| a.max(v.abs()))
}

/// Assembles a matrix from a grid of blocks. Every row of blocks must have
/// consistent heights and every column consistent widths.
pub fn block(rows: &[&[&Mat]]) -> Mat {
    let heights: Vec<usize> = rows.iter().map(|r| r[0].nrows()).collect();
    let widths: Vec<usize> = rows[0].iter().map(|b| b.ncols()).collect();
    let mut out = Mat::zeros(heights.iter().sum(), widths.iter().sum());
    let mut r0 = 0;
    for (bi, row) in rows.iter().enumerate() {
        let mut c0 = 0;
        for (bj, b) in row.iter().enumerate() {
            assert_eq!(b.nrows(), heights[bi], "block row {bi} height");
            assert_eq!(b.ncols(), widths[bj], "block column {bj} width");
            out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(*b);
            c0 += b.ncols();
        }
        r0 += heights[bi];
    }
    out
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Columns `perm[0], perm[1], ...` of the identity: `x_new = P^T x_old`
/// places old coordinate `perm[p]` at position `p`.
pub fn permutation_matrix(perm: &[usize]) -> Mat {
    let n = perm.len();
    let mut p = Mat::zeros(n, n);
    for (new, &old) in perm.iter().enumerate() {
        p[(old, new)] = 1.0;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_eigenvalues() {
        let e = eigenvalues(&Mat::from_diagonal(&nalgebra::dvector![-1.0, -2.0])).unwrap();
        assert_abs_diff_eq!(e[0].re, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1].re, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn rotation_generator_eigenvalues() {
        let m = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let e = eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(e[0].im, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1].im, 1.0, epsilon = 1e-14);
        assert_eq!(e[0].re, e[1].re);
    }

    #[test]
    fn closed_loop_scalar_eigenvalue() {
        // 1 + 1*(-2)*1
        let e = eigenvalues(&Mat::from_element(1, 1, 1.0 + 1.0 * -2.0 * 1.0)).unwrap();
        assert_eq!(e, vec![Complex::new(-1.0, 0.0)]);
    }

    #[test]
    fn eigenvalue_input_errors() {
        assert!(matches!(eigenvalues(&Mat::zeros(2, 3)), Err(Error::Dimension(_))));
        let mut m = Mat::zeros(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(eigenvalues(&m), Err(Error::Input(_))));
    }

    #[test]
    fn ranks() {
        let tol = Tolerances::default();
        assert_eq!(numerical_rank(&Mat::zeros(3, 2), &tol), 0);
        assert_eq!(numerical_rank(&Mat::identity(4, 4), &tol), 4);
        let m = Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-12]);
        // sigma = (2 + 1e-12 ± sqrt((2+1e-12)^2 - 4e-12)) / 2 analytically
        let t = 2.0 + 1e-12_f64;
        let d = 1e-12_f64;
        let s2 = d / ((t + (t * t - 4.0 * d).sqrt()) / 2.0);
        assert!(s2 < 1e-11);
        assert_eq!(numerical_rank(&m, &tol), 1);
    }

    #[test]
    fn block_helpers() {
        let a = Mat::from_element(1, 1, 1.0);
        let b = Mat::from_element(1, 2, 2.0);
        let c = Mat::from_element(2, 1, 3.0);
        let d = Mat::from_element(2, 2, 4.0);
        let m = block(&[&[&a, &b], &[&c, &d]]);
        assert_eq!(m.shape(), (3, 3));
        assert_eq!(m[(2, 2)], 4.0);
        let bd = block_diag(&[&a, &Mat::zeros(0, 0), &d]);
        assert_eq!(bd.shape(), (3, 3));
        assert_eq!(bd[(0, 1)], 0.0);
    }
}
