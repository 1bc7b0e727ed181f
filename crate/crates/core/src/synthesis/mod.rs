//! Structured controller existence tests and synthesis.
//!
//! Given a structured realization, [`structured_stabilizability_test`]
//! checks the diagonal subsystems `(A_ii, B_ii, C_ii)` and
//! [`synthesize_k0`] builds the observer-based controller
//! `(A + B F_d + L_d C + L_d D F_d, -L_d, F_d, 0)` from block-diagonal
//! gains. [`youla`] parameterizes further structured stabilizing
//! controllers and [`diagonal_test`] decides stabilizability from the
//! transfer matrix alone.

mod diagonal;
pub mod youla;

pub use diagonal::{diagonal_test, diagonal_test_with};
pub use youla::{build_youla_generator, close_lft, LftClosure, YoulaGenerator};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{block_diag, observer_gain, stabilizing_gain, Mat, Tolerances};
use crate::realize::{PbhKind, StructuredRealization};
use crate::serde_util::{matrix, one_based};
use crate::stability::{internal_stability_ss, pbh, ClosedLoopReport, PbhProperty, Verdict};
use crate::system::StateSpaceSystem;

/// A diagonal subsystem failing the PBH test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockFailure {
    #[serde(serialize_with = "one_based")]
    pub node: usize,
    pub kind: PbhKind,
    pub eig: Complex64,
    pub deficiency: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisReport {
    pub test: String,
    pub stabilizable: Verdict,
    pub failing_blocks: Vec<BlockFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<StateSpaceSystem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_loop: Option<ClosedLoopReport>,
}

/// PBH stabilizability of `(A_ii, B_ii)` and detectability of
/// `(C_ii, A_ii)` for every node with a nonempty state block.
pub fn structured_stabilizability_test(
    r: &StructuredRealization,
    tol: &Tolerances,
) -> Result<SynthesisReport> {
    let mut failing = Vec::new();
    for node in r.states().support() {
        let (a, b, c) = r.diagonal_block(node);
        for (port, property, kind) in [
            (&b, PbhProperty::Stabilizable, PbhKind::Stabilizability),
            (&c, PbhProperty::Detectable, PbhKind::Detectability),
        ] {
            for w in pbh(&a, port, property, tol)?.witnesses {
                failing.push(BlockFailure {
                    node,
                    kind,
                    eig: w.eigenvalue,
                    deficiency: w.deficiency,
                });
            }
        }
    }
    Ok(SynthesisReport {
        test: "diagonal-blocks".into(),
        stabilizable: Verdict::from_bool(failing.is_empty()),
        failing_blocks: failing,
        controller: None,
        closed_loop: None,
    })
}

/// Block-diagonal state-feedback and observer gains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainSchedule {
    #[serde(serialize_with = "matrix")]
    pub f_d: Mat,
    #[serde(serialize_with = "matrix")]
    pub l_d: Mat,
}

/// Gains with `A_ii + B_ii F_i` and `A_ii + L_i C_ii` Hurwitz. With a seed,
/// each gain is computed for a randomly rescaled input (output) matrix, so
/// different seeds give different admissible gains.
pub fn gain_schedule(
    r: &StructuredRealization,
    tol: &Tolerances,
    seed: Option<u64>,
) -> Result<GainSchedule> {
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut scale = || match rng.as_mut() {
        Some(g) => 2f64.powf(g.random_range(-1.0..1.0)),
        None => 1.0,
    };
    let (n, k, m) = (r.states(), r.sys().outputs(), r.sys().inputs());
    let mut fs = Vec::with_capacity(n.n_nodes());
    let mut ls = Vec::with_capacity(n.n_nodes());
    for i in 0..n.n_nodes() {
        if n.dim(i) == 0 {
            fs.push(Mat::zeros(m.dim(i), 0));
            ls.push(Mat::zeros(0, k.dim(i)));
            continue;
        }
        let (a, b, c) = r.diagonal_block(i);
        let (sf, sl) = (scale(), scale());
        let f = stabilizing_gain(&a, &(b * sf), tol).map_err(|e| block_error(i, "stabilizing", e))? * sf;
        let l = observer_gain(&a, &(c * sl), tol).map_err(|e| block_error(i, "observer", e))? * sl;
        fs.push(f);
        ls.push(l);
    }
    Ok(GainSchedule {
        f_d: block_diag(&fs.iter().collect::<Vec<_>>()),
        l_d: block_diag(&ls.iter().collect::<Vec<_>>()),
    })
}

fn block_error(node: usize, what: &str, e: Error) -> Error {
    Error::Synthesis(format!("no {what} gain for node {}: {e}", node + 1))
}

/// The observer-based controller for given gains, with the plant's state
/// partition.
pub fn observer_controller(r: &StructuredRealization, gains: &GainSchedule) -> Result<StateSpaceSystem> {
    let g = r.sys();
    let (f, l) = (&gains.f_d, &gains.l_d);
    if f.shape() != (g.n_inputs(), g.n_states()) || l.shape() != (g.n_states(), g.n_outputs()) {
        return Err(Error::Input(format!(
            "gains F {:?} and L {:?} do not fit a plant with {} states, {} inputs, {} outputs",
            f.shape(),
            l.shape(),
            g.n_states(),
            g.n_inputs(),
            g.n_outputs()
        )));
    }
    let a_k = g.a() + g.b() * f + l * g.c() + l * g.d() * f;
    StateSpaceSystem::partitioned(
        a_k,
        -l,
        f.clone(),
        Mat::zeros(g.n_inputs(), g.n_outputs()),
        g.inputs().clone(),
        g.outputs().clone(),
        Some(r.states().clone()),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct K0Design {
    pub gains: GainSchedule,
    pub controller: StructuredRealization,
    pub closed_loop: ClosedLoopReport,
    pub report: SynthesisReport,
}

/// The particular structured stabilizing controller `K0`.
pub fn synthesize_k0(r: &StructuredRealization, tol: &Tolerances) -> Result<K0Design> {
    synthesize_k0_with(r, tol, None)
}

pub fn synthesize_k0_with(
    r: &StructuredRealization,
    tol: &Tolerances,
    gain_seed: Option<u64>,
) -> Result<K0Design> {
    let mut report = structured_stabilizability_test(r, tol)?;
    if report.stabilizable != Verdict::Yes {
        let what: Vec<String> = report
            .failing_blocks
            .iter()
            .map(|f| format!("node {} {:?} at {}", f.node + 1, f.kind, f.eig))
            .collect();
        return Err(Error::Synthesis(format!(
            "diagonal subsystems fail the PBH test: {}",
            what.join(", ")
        )));
    }
    let gains = gain_schedule(r, tol, gain_seed)?;
    let k0 = observer_controller(r, &gains)?;
    let closed_loop = internal_stability_ss(r.sys(), &k0, tol)?;
    if !closed_loop.stable {
        return Err(Error::Synthesis(format!(
            "K0 closed loop is not stable (abscissa {:e})",
            closed_loop.abscissa
        )));
    }
    let controller = StructuredRealization::verified(k0, r.pattern().controller(), tol)?;
    report.controller = Some(controller.sys().clone());
    report.closed_loop = Some(closed_loop.clone());
    Ok(K0Design {
        gains,
        controller,
        closed_loop,
        report,
    })
}
