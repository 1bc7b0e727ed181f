//! Stabilizability decision through diagonal controllers: stabilize each
//! `G_ii` on its own and test the block-diagonal controller on `G`.

use super::{synthesize_k0_with, SynthesisReport};
use crate::error::{Error, Result};
use crate::graph::SparsityPattern;
use crate::numerics::{block_diag, Mat, Tolerances};
use crate::realize::{minimal_realization, StructuredRealization};
use crate::stability::internal_stability_ss;
use crate::system::{is_structured_tf, IndexSet, StateSpaceSystem, StructuredPattern};

/// Decides whether `G` admits a stabilizing controller with the pattern's
/// structure. Needs no structured realization of `G`.
pub fn diagonal_test(g: &StateSpaceSystem, pattern: &StructuredPattern, tol: &Tolerances) -> Result<SynthesisReport> {
    diagonal_test_with(g, pattern, tol, None)
}

/// As [`diagonal_test`], with randomly rescaled sub-controller gains when a
/// seed is given. The verdict does not depend on the gains.
pub fn diagonal_test_with(
    g: &StateSpaceSystem,
    pattern: &StructuredPattern,
    tol: &Tolerances,
    gain_seed: Option<u64>,
) -> Result<SynthesisReport> {
    let check = is_structured_tf(g, pattern, tol)?;
    if !check.structured {
        let v = &check.violations[0];
        return Err(Error::Structure(format!(
            "plant is nonzero in forbidden block ({}, {})",
            v.row_node + 1,
            v.col_node + 1
        )));
    }
    let gmin = minimal_realization(g, tol)?;
    let (k, m) = (g.outputs(), g.inputs());
    let nn = g.n_nodes();
    let mut parts = Vec::with_capacity(nn);
    for i in 0..nn {
        let (ki, mi) = (k.dim(i), m.dim(i));
        let sub = minimal_realization(&gmin.subsystem(&[i], &[i])?, tol)?;
        if sub.n_states() == 0 || ki == 0 || mi == 0 {
            parts.push(StateSpaceSystem::zero(IndexSet::single(mi), IndexSet::single(ki))?);
            continue;
        }
        let order = sub.n_states();
        let local = sub.with_states(Some(IndexSet::single(order)))?;
        let local_pattern = local.io_pattern(&SparsityPattern::diagonal(1))?;
        let r = StructuredRealization::verified(local, local_pattern, tol)?;
        let seed = gain_seed.map(|s| s.wrapping_add(i as u64));
        parts.push(synthesize_k0_with(&r, tol, seed)?.controller.into_system());
    }
    let kd = StateSpaceSystem::partitioned(
        block_diag(&parts.iter().map(|p| p.a()).collect::<Vec<_>>()),
        block_diag(&parts.iter().map(|p| p.b()).collect::<Vec<_>>()),
        block_diag(&parts.iter().map(|p| p.c()).collect::<Vec<_>>()),
        Mat::zeros(m.total(), k.total()),
        m.clone(),
        k.clone(),
        Some(IndexSet::new(parts.iter().map(|p| p.n_states()).collect())),
    )?;
    let cl = internal_stability_ss(&gmin, &kd, tol)?;
    Ok(SynthesisReport {
        test: "diagonal-controller".into(),
        stabilizable: cl.verdict,
        failing_blocks: vec![],
        controller: Some(kd),
        closed_loop: Some(cl),
    })
}
