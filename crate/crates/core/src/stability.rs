//! Hurwitz and PBH predicates and the two internal-stability criteria for
//! the positive-feedback loop `u = K y`, `y = G u`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    block, block_diag, complex_singular_values, eigenvalues, singular_values, CMat, Mat,
    Tolerances,
};
use crate::numerics::riccati::unstable_modes;
use crate::realize::minimal_realization;
use crate::serde_util::{finite_or_null, matrix};
use crate::system::StateSpaceSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Indeterminate,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HurwitzCheck {
    pub hurwitz: bool,
    #[serde(serialize_with = "finite_or_null")]
    pub abscissa: f64,
}

/// Hurwitz test with an explicit dead band: eigenvalues with
/// `|Re| <= hurwitz_margin` give [`Error::Marginal`].
pub fn is_hurwitz(m: &Mat, tol: &Tolerances) -> Result<HurwitzCheck> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("Hurwitz test of a {:?} matrix", m.shape())));
    }
    let abscissa = eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if abscissa.abs() <= tol.hurwitz_margin {
        return Err(Error::Marginal { abscissa });
    }
    Ok(HurwitzCheck {
        hurwitz: abscissa < -tol.hurwitz_margin,
        abscissa,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PbhProperty {
    Stabilizable,
    Detectable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbhWitness {
    pub eigenvalue: Complex64,
    pub deficiency: usize,
    /// Squared modulus of each state coordinate in a unit null vector.
    #[serde(skip)]
    pub mass: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbhCertificate {
    pub property: PbhProperty,
    pub verdict: bool,
    pub witnesses: Vec<PbhWitness>,
}

/// PBH rank test at every eigenvalue with `Re >= -hurwitz_margin`:
/// `[A - lambda I, B]` for stabilizability, `[A - lambda I; C]` for
/// detectability.
pub fn pbh(a: &Mat, port: &Mat, property: PbhProperty, tol: &Tolerances) -> Result<PbhCertificate> {
    let n = a.nrows();
    let (a_eff, b_eff) = match property {
        PbhProperty::Stabilizable => (a.clone(), port.clone()),
        PbhProperty::Detectable => (a.transpose(), port.transpose()),
    };
    if !a.is_square() || b_eff.nrows() != n {
        return Err(Error::Dimension(format!(
            "PBH test with A {:?} and {:?}",
            a.shape(),
            port.shape()
        )));
    }
    let p = b_eff.ncols();
    let mut witnesses = Vec::new();
    for lambda in unstable_modes(&a_eff, tol.hurwitz_margin)? {
        let mut m = CMat::zeros(n, n + p);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(a_eff[(i, j)], 0.0);
            }
            m[(i, i)] -= lambda;
            for j in 0..p {
                m[(i, n + j)] = Complex64::new(b_eff[(i, j)], 0.0);
            }
        }
        let sv = complex_singular_values(&m);
        let cutoff = tol.rank_cutoff(sv.first().copied().unwrap_or(0.0));
        let rank = sv.iter().filter(|&&s| s > cutoff).count();
        if rank < n {
            witnesses.push(PbhWitness {
                eigenvalue: lambda,
                deficiency: n - rank,
                mass: left_null_mass(m),
            });
        }
    }
    Ok(PbhCertificate {
        property,
        verdict: witnesses.is_empty(),
        witnesses,
    })
}

fn left_null_mass(m: CMat) -> Vec<f64> {
    // Singular values come sorted, so the last column of the square U is
    // the best left null vector.
    let (u, _) = crate::numerics::complex_left_singular(&m).expect("SVD of a finite matrix");
    u.column(u.ncols() - 1).iter().map(|z| z.norm_sqr()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RealizationStatus {
    pub stabilizable: bool,
    pub detectable: bool,
}

impl RealizationStatus {
    pub fn of(sys: &StateSpaceSystem, tol: &Tolerances) -> Result<Self> {
        Ok(RealizationStatus {
            stabilizable: pbh(sys.a(), sys.b(), PbhProperty::Stabilizable, tol)?.verdict,
            detectable: pbh(sys.a(), sys.c(), PbhProperty::Detectable, tol)?.verdict,
        })
    }

    pub fn ok(&self) -> bool {
        self.stabilizable && self.detectable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedLoopReport {
    pub well_posed: bool,
    /// Smallest singular value of `I - D D_K`.
    pub sigma_min: f64,
    #[serde(serialize_with = "matrix")]
    pub closed_loop_a: Mat,
    pub eigenvalues: Vec<Complex64>,
    #[serde(serialize_with = "finite_or_null")]
    pub abscissa: f64,
    /// `None` when the spectrum touches the imaginary-axis dead band.
    pub hurwitz: Option<bool>,
    pub plant: RealizationStatus,
    pub controller: RealizationStatus,
    pub verdict: Verdict,
    pub stable: bool,
}

fn check_loop_dims(g: &StateSpaceSystem, k: &StateSpaceSystem) -> Result<()> {
    if k.n_inputs() != g.n_outputs() || k.n_outputs() != g.n_inputs() {
        return Err(Error::Dimension(format!(
            "controller is {}x{} but the plant is {}x{}",
            k.n_outputs(),
            k.n_inputs(),
            g.n_outputs(),
            g.n_inputs()
        )));
    }
    Ok(())
}

/// Smallest singular value of `I - D D_K` and whether it clears the rank
/// cutoff.
fn well_posedness(d: &Mat, dk: &Mat, tol: &Tolerances) -> (bool, f64) {
    let k = d.nrows();
    let sv = singular_values(&(Mat::identity(k, k) - d * dk));
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) => (min > tol.rank_cutoff(max), min),
        _ => (true, f64::INFINITY),
    }
}

fn hurwitz_option(m: &Mat, tol: &Tolerances) -> Result<Option<bool>> {
    match is_hurwitz(m, tol) {
        Ok(h) => Ok(Some(h.hurwitz)),
        Err(Error::Marginal { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// State-space criterion: well-posedness plus a Hurwitz closed-loop matrix
/// `diag(A, A_K) + diag(B, B_K) [[I, -D_K], [-D, I]]^{-1} [[0, C_K], [C, 0]]`.
///
/// A Hurwitz matrix certifies stabilization outright. A non-Hurwitz one
/// only refutes it when both realizations are stabilizable and detectable;
/// otherwise the verdict is indeterminate.
pub fn internal_stability_ss(
    g: &StateSpaceSystem,
    k: &StateSpaceSystem,
    tol: &Tolerances,
) -> Result<ClosedLoopReport> {
    check_loop_dims(g, k)?;
    let plant = RealizationStatus::of(g, tol)?;
    let controller = RealizationStatus::of(k, tol)?;
    let (well_posed, sigma_min) = well_posedness(g.d(), k.d(), tol);
    if !well_posed {
        return Ok(ClosedLoopReport {
            well_posed,
            sigma_min,
            closed_loop_a: Mat::zeros(0, 0),
            eigenvalues: vec![],
            abscissa: f64::NAN,
            hurwitz: None,
            plant,
            controller,
            verdict: Verdict::No,
            stable: false,
        });
    }
    let (m, p) = (g.n_inputs(), g.n_outputs());
    let (n, nk) = (g.n_states(), k.n_states());
    let coupling = block(&[
        &[&Mat::identity(m, m), &(-k.d())],
        &[&(-g.d()), &Mat::identity(p, p)],
    ]);
    let coupling_inv = coupling
        .lu()
        .try_inverse()
        .ok_or(Error::IllPosed { sigma_min })?;
    let outputs = block(&[
        &[&Mat::zeros(m, n), k.c()],
        &[g.c(), &Mat::zeros(p, nk)],
    ]);
    let a_bar = block_diag(&[g.a(), k.a()]) + block_diag(&[g.b(), k.b()]) * coupling_inv * outputs;
    let eig = eigenvalues(&a_bar)?;
    let abscissa = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let hurwitz = hurwitz_option(&a_bar, tol)?;
    let verdict = match hurwitz {
        Some(true) => Verdict::Yes,
        Some(false) if plant.ok() && controller.ok() => Verdict::No,
        _ => Verdict::Indeterminate,
    };
    Ok(ClosedLoopReport {
        well_posed,
        sigma_min,
        closed_loop_a: a_bar,
        eigenvalues: eig,
        abscissa,
        hurwitz,
        plant,
        controller,
        verdict,
        stable: verdict == Verdict::Yes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferLoopReport {
    pub well_posed: bool,
    /// Minimal order of the four-block closed-loop map.
    pub order: usize,
    pub eigenvalues: Vec<Complex64>,
    #[serde(serialize_with = "finite_or_null")]
    pub abscissa: f64,
    pub verdict: Verdict,
    pub stable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Realization of `[[I, -G], [-K, I]]^{-1}`, the map `(v1, v2) -> (e1, e2)`
/// with `e1 = v1 + G e2`, `e2 = v2 + K e1`.
pub fn closed_loop_map(g: &StateSpaceSystem, k: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    check_loop_dims(g, k)?;
    let (p, m) = (g.n_outputs(), g.n_inputs());
    let (n, nk) = (g.n_states(), k.n_states());
    let mixing = block(&[
        &[&Mat::identity(p, p), &(-g.d())],
        &[&(-k.d()), &Mat::identity(m, m)],
    ]);
    let mi = mixing
        .lu()
        .try_inverse()
        .ok_or(Error::IllPosed { sigma_min: 0.0 })?;
    let b_mix = block(&[
        &[&Mat::zeros(n, p), g.b()],
        &[k.b(), &Mat::zeros(nk, m)],
    ]);
    let c_diag = block_diag(&[g.c(), k.c()]);
    let a = block_diag(&[g.a(), k.a()]) + &b_mix * &mi * &c_diag;
    let b = &b_mix * &mi;
    let c = &mi * c_diag;
    StateSpaceSystem::new(a, b, c, mi)
}

/// Input-output criterion: `I - G(inf) K(inf)` invertible and the
/// four-block closed-loop map stable, judged from the poles of a minimal
/// realization of that map.
pub fn internal_stability_tf(
    g: &StateSpaceSystem,
    k: &StateSpaceSystem,
    tol: &Tolerances,
) -> Result<TransferLoopReport> {
    check_loop_dims(g, k)?;
    let (well_posed, sigma_min) = well_posedness(g.d(), k.d(), tol);
    if !well_posed {
        return Ok(TransferLoopReport {
            well_posed,
            order: 0,
            eigenvalues: vec![],
            abscissa: f64::NAN,
            verdict: Verdict::No,
            stable: false,
            reason: Some(format!("I - D D_K is singular (smallest singular value {sigma_min:e})")),
        });
    }
    let map = minimal_realization(&closed_loop_map(g, k)?, tol)?;
    let eig = eigenvalues(map.a())?;
    let abscissa = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let (verdict, reason) = match hurwitz_option(map.a(), tol)? {
        Some(true) => (Verdict::Yes, None),
        Some(false) => (
            Verdict::No,
            Some(format!("closed-loop map has a pole with real part {abscissa:.6e}")),
        ),
        None => (
            Verdict::Indeterminate,
            Some(format!("closed-loop pole within the margin of the imaginary axis ({abscissa:.3e})")),
        ),
    };
    Ok(TransferLoopReport {
        well_posed,
        order: map.n_states(),
        eigenvalues: eig,
        abscissa,
        verdict,
        stable: verdict == Verdict::Yes,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64, b: f64, c: f64, d: f64) -> StateSpaceSystem {
        StateSpaceSystem::new(
            Mat::from_element(1, 1, a),
            Mat::from_element(1, 1, b),
            Mat::from_element(1, 1, c),
            Mat::from_element(1, 1, d),
        )
        .unwrap()
    }

    fn gain(d: f64) -> StateSpaceSystem {
        StateSpaceSystem::new(Mat::zeros(0, 0), Mat::zeros(0, 1), Mat::zeros(1, 0), Mat::from_element(1, 1, d))
            .unwrap()
    }

    #[test]
    fn hurwitz_basics() {
        let tol = Tolerances::default();
        let h = is_hurwitz(&(-Mat::identity(3, 3)), &tol).unwrap();
        assert!(h.hurwitz);
        assert_eq!(h.abscissa, -1.0);
        assert!(!is_hurwitz(&Mat::from_element(1, 1, 1.0), &tol).unwrap().hurwitz);
        assert!(matches!(
            is_hurwitz(&Mat::from_element(1, 1, 1e-12), &tol),
            Err(Error::Marginal { .. })
        ));
        assert!(is_hurwitz(&Mat::zeros(0, 0), &tol).unwrap().hurwitz);
    }

    #[test]
    fn pbh_scalar_cases() {
        let tol = Tolerances::default();
        let one = Mat::from_element(1, 1, 1.0);
        assert!(pbh(&one, &one, PbhProperty::Stabilizable, &tol).unwrap().verdict);
        let cert = pbh(&one, &Mat::zeros(1, 1), PbhProperty::Stabilizable, &tol).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.witnesses[0].eigenvalue, Complex64::new(1.0, 0.0));
        assert_eq!(cert.witnesses[0].deficiency, 1);
    }

    #[test]
    fn static_feedback_on_unstable_pole() {
        // 1/(s-1) with u = -2 y: A_bar = 1 + 1 * (-2) * 1 = -1.
        let tol = Tolerances::default();
        let r = internal_stability_ss(&scalar(1.0, 1.0, 1.0, 0.0), &gain(-2.0), &tol).unwrap();
        assert!(r.stable);
        assert!((r.closed_loop_a[(0, 0)] + 1.0).abs() < 1e-14);
        let t = internal_stability_tf(&scalar(1.0, 1.0, 1.0, 0.0), &gain(-2.0), &tol).unwrap();
        assert!(t.stable);
    }

    #[test]
    fn zero_controller_keeps_unstable_pole() {
        let tol = Tolerances::default();
        let r = internal_stability_ss(&scalar(1.0, 1.0, 1.0, 0.0), &gain(0.0), &tol).unwrap();
        assert_eq!(r.verdict, Verdict::No);
        assert!(!internal_stability_tf(&scalar(1.0, 1.0, 1.0, 0.0), &gain(0.0), &tol).unwrap().stable);
        assert!(internal_stability_tf(&scalar(-1.0, 1.0, 1.0, 0.0), &gain(0.0), &tol).unwrap().stable);
    }

    #[test]
    fn ill_posed_loop() {
        let tol = Tolerances::default();
        let r = internal_stability_ss(&scalar(-1.0, 1.0, 1.0, 1.0), &gain(1.0), &tol).unwrap();
        assert!(!r.well_posed);
        assert!(r.eigenvalues.is_empty());
        assert!(!internal_stability_tf(&scalar(-1.0, 1.0, 1.0, 1.0), &gain(1.0), &tol).unwrap().stable);
    }

    #[test]
    fn hidden_unstable_mode_is_indeterminate() {
        // Unobservable unstable state: the loop matrix is not Hurwitz, but
        // the realization cannot refute stabilization of the transfer map.
        let tol = Tolerances::default();
        let g = StateSpaceSystem::new(
            Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0])),
            Mat::from_row_slice(2, 1, &[1.0, 1.0]),
            Mat::from_row_slice(1, 2, &[1.0, 0.0]),
            Mat::zeros(1, 1),
        )
        .unwrap();
        let r = internal_stability_ss(&g, &gain(0.0), &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Indeterminate);
        assert!(!r.plant.detectable);
    }
}
