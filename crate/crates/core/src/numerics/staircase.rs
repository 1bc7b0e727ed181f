//! Orthogonal staircase reductions exposing the controllable and observable
//! subspaces.
//!
//! Ordering convention: the controllability form puts the uncontrollable
//! states first and the controllable states last; the observability form
//! puts the observable states first and the unobservable states last. Both
//! results are block lower-triangular:
//!
//! ```text
//!  controllability:  [A_uc   0 ] [0  ]      observability:  [A_o    0  ]
//!                    [A_21  A_c] [B_c]                      [A_21  A_uo]
//!                                                            [C_o    0  ]
//! ```

use super::{range_basis, singular_values, Mat, Tolerances};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct StaircaseResult {
    /// Orthogonal `T`; new coordinates `z` satisfy `x = T z`.
    pub transform: Mat,
    /// Controllable (or observable) dimension.
    pub dim: usize,
    /// `T^T A T`.
    pub a: Mat,
    /// `T^T B` for the controllability form, `C T` for the observability form.
    pub port: Mat,
}

impl StaircaseResult {
    pub fn n(&self) -> usize {
        self.transform.nrows()
    }
}

fn scale_of(a: &Mat, b: &Mat) -> f64 {
    let mut ab = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    ab.view_mut((0, 0), a.shape()).copy_from(a);
    ab.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    singular_values(&ab).first().copied().unwrap_or(0.0)
}

/// Controllable-subspace staircase with controllable states trailing.
pub fn controllability_staircase(a: &Mat, b: &Mat, tol: &Tolerances) -> Result<StaircaseResult> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "staircase of A {:?} with B {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let cutoff = tol.rank_cutoff(scale_of(a, b));
    let mut t = Mat::identity(n, n);
    let mut found = 0usize;
    let mut prev = 0usize;
    loop {
        if found == n {
            break;
        }
        let coupling = if found == 0 {
            b.clone()
        } else {
            let at = t.transpose() * a * &t;
            at.view((found, prev), (n - found, found - prev)).into_owned()
        };
        let (u, r) = range_basis(&coupling, cutoff);
        if r == 0 {
            break;
        }
        let tail = t.columns(found, n - found) * u;
        t.columns_mut(found, n - found).copy_from(&tail);
        prev = found;
        found += r;
    }
    let perm: Vec<usize> = (found..n).chain(0..found).collect();
    let t = t * super::permutation_matrix(&perm);
    let a_new = t.transpose() * a * &t;
    let b_new = t.transpose() * b;
    Ok(StaircaseResult {
        transform: t,
        dim: found,
        a: a_new,
        port: b_new,
    })
}

/// Observable-subspace staircase with unobservable states trailing.
pub fn observability_staircase(a: &Mat, c: &Mat, tol: &Tolerances) -> Result<StaircaseResult> {
    let n = a.nrows();
    if !a.is_square() || c.ncols() != n {
        return Err(Error::Dimension(format!(
            "staircase of A {:?} with C {:?}",
            a.shape(),
            c.shape()
        )));
    }
    let dual = controllability_staircase(&a.transpose(), &c.transpose(), tol)?;
    let r = dual.dim;
    let perm: Vec<usize> = (n - r..n).chain(0..n - r).collect();
    let t = dual.transform * super::permutation_matrix(&perm);
    let a_new = t.transpose() * a * &t;
    let c_new = c * &t;
    Ok(StaircaseResult {
        transform: t,
        dim: r,
        a: a_new,
        port: c_new,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{eigenvalues, numerical_rank};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle: rank of `[B, AB, ..., A^{n-1} B]`.
    fn ctrb_rank(a: &Mat, b: &Mat, tol: &Tolerances) -> usize {
        let n = a.nrows();
        let m = b.ncols();
        let mut k = Mat::zeros(n, n * m);
        let mut blk = b.clone();
        for i in 0..n {
            k.view_mut((0, i * m), (n, m)).copy_from(&blk);
            blk = a * blk;
        }
        numerical_rank(&k, tol)
    }

    #[test]
    fn controllable_pair() {
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = Mat::from_row_slice(2, 1, &[0.0, 1.0]);
        let s = controllability_staircase(&a, &b, &Tolerances::default()).unwrap();
        assert_eq!(s.dim, 2);
    }

    #[test]
    fn zero_input_matrix() {
        let a = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let s = controllability_staircase(&a, &Mat::zeros(2, 1), &Tolerances::default()).unwrap();
        assert_eq!(s.dim, 0);
    }

    fn random_lower_two_block(rng: &mut ChaCha8Rng) -> (Mat, Mat) {
        let n1 = rng.random_range(1..=3);
        let n2 = rng.random_range(1..=3);
        let n = n1 + n2;
        let mut a = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        a.view_mut((0, n1), (n1, n2)).fill(0.0);
        // input of the second node only reaches the second block
        let mut b2 = Mat::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
        b2.view_mut((0, 0), (n1, 1)).fill(0.0);
        if rng.random_bool(0.3) {
            // make part of block 2 uncontrollable as well
            a.view_mut((n1, n1), (n2, n2)).fill_lower_triangle(0.0, 1);
            b2.view_mut((n1, 0), (n2 - 1, 1)).fill(0.0);
        }
        (a, b2)
    }

    #[test]
    fn matches_controllability_matrix_rank() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (a, b) = random_lower_two_block(&mut rng);
            let s = controllability_staircase(&a, &b, &tol).unwrap();
            assert_eq!(s.dim, ctrb_rank(&a, &b, &tol));
            let n = a.nrows();
            let ttt = s.transform.transpose() * &s.transform;
            assert!((ttt - Mat::identity(n, n)).amax() < 1e-10);
            // uncontrollable rows of B and the upper-right block vanish
            let nu = n - s.dim;
            assert!(s.port.rows(0, nu).amax() < 1e-9);
            assert!(s.a.view((0, nu), (nu, s.dim)).amax() < 1e-9);
            let mut e1: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.norm()).collect();
            let mut e2: Vec<f64> = eigenvalues(&s.a).unwrap().iter().map(|z| z.norm()).collect();
            e1.sort_by(f64::total_cmp);
            e2.sort_by(f64::total_cmp);
            for (x, y) in e1.iter().zip(&e2) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn observability_duality() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (a, b) = random_lower_two_block(&mut rng);
            let at = a.transpose();
            let c = b.transpose();
            let obs = observability_staircase(&at, &c, &tol).unwrap();
            let ctr = controllability_staircase(&a, &b, &tol).unwrap();
            assert_eq!(obs.dim, ctr.dim);
            let n = a.nrows();
            assert!(obs.port.columns(obs.dim, n - obs.dim).amax() < 1e-9);
            assert!(obs.a.view((0, obs.dim), (obs.dim, n - obs.dim)).amax() < 1e-9);
        }
    }
}
