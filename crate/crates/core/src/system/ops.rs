//! Interconnections of state-space systems.
//!
//! When both operands carry state partitions over the same nodes, the
//! combined state vector is reordered node by node (all of node 1's states
//! from every operand, then node 2's, ...). For structured operands this
//! yields a structured realization of the result, which is the constructive
//! side of the closure of structured transfer matrices under products.

use super::{IndexSet, StateSpaceSystem};
use crate::error::{Error, Result};
use crate::numerics::{block, Mat};

/// Permutation that regroups the concatenation of several partitioned state
/// vectors node by node, and the merged partition. New state `p` is old
/// (concatenated) state `perm[p]`.
pub fn interleave_states(parts: &[&IndexSet]) -> Result<(Vec<usize>, IndexSet)> {
    let n_nodes = parts.first().map(|p| p.n_nodes()).unwrap_or(0);
    if parts.iter().any(|p| p.n_nodes() != n_nodes) {
        return Err(Error::Dimension("state partitions over different node counts".into()));
    }
    let mut base = 0;
    let mut offsets = Vec::with_capacity(parts.len());
    for p in parts {
        offsets.push(base);
        base += p.total();
    }
    let mut perm = Vec::with_capacity(base);
    let mut dims = vec![0usize; n_nodes];
    for node in 0..n_nodes {
        for (p, off) in parts.iter().zip(&offsets) {
            perm.extend(p.range(node).map(|i| off + i));
            dims[node] += p.dim(node);
        }
    }
    Ok((perm, IndexSet::new(dims)))
}

fn merged(sys: StateSpaceSystem, parts: &[Option<&IndexSet>]) -> Result<StateSpaceSystem> {
    let all: Option<Vec<&IndexSet>> = parts.iter().copied().collect();
    match all {
        Some(p) if p.iter().all(|x| x.n_nodes() == sys.n_nodes()) => {
            let (perm, idx) = interleave_states(&p)?;
            sys.permute_states(&perm, Some(idx))
        }
        _ => Ok(sys),
    }
}

/// The cascade `G1 G2` (signal passes through `g2` first).
pub fn series(g1: &StateSpaceSystem, g2: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    if g1.n_inputs() != g2.n_outputs() {
        return Err(Error::Dimension(format!(
            "series connection of a {}-input system after a {}-output system",
            g1.n_inputs(),
            g2.n_outputs()
        )));
    }
    let (n1, n2) = (g1.n_states(), g2.n_states());
    let a = block(&[
        &[g2.a(), &Mat::zeros(n2, n1)],
        &[&(g1.b() * g2.c()), g1.a()],
    ]);
    let b = block(&[&[g2.b()], &[&(g1.b() * g2.d())]]);
    let c = block(&[&[&(g1.d() * g2.c()), g1.c()]]);
    let d = g1.d() * g2.d();
    let sys = StateSpaceSystem::partitioned(
        a,
        b,
        c,
        d,
        g1.outputs().clone(),
        g2.inputs().clone(),
        None,
    )?;
    merged(sys, &[g2.states(), g1.states()])
}

/// The sum `G1 + G2`.
pub fn parallel(g1: &StateSpaceSystem, g2: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    if g1.n_inputs() != g2.n_inputs() || g1.n_outputs() != g2.n_outputs() {
        return Err(Error::Dimension("parallel connection of different shapes".into()));
    }
    let (n1, n2) = (g1.n_states(), g2.n_states());
    let a = block(&[
        &[g1.a(), &Mat::zeros(n1, n2)],
        &[&Mat::zeros(n2, n1), g2.a()],
    ]);
    let b = block(&[&[g1.b()], &[g2.b()]]);
    let c = block(&[&[g1.c(), g2.c()]]);
    let sys = StateSpaceSystem::partitioned(
        a,
        b,
        c,
        g1.d() + g2.d(),
        g1.outputs().clone(),
        g1.inputs().clone(),
        None,
    )?;
    merged(sys, &[g1.states(), g2.states()])
}

impl StateSpaceSystem {
    /// `alpha G`.
    pub fn scaled(&self, alpha: f64) -> Result<StateSpaceSystem> {
        StateSpaceSystem::partitioned(
            self.a().clone(),
            self.b().clone(),
            self.c() * alpha,
            self.d() * alpha,
            self.outputs().clone(),
            self.inputs().clone(),
            self.states().cloned(),
        )
    }
}

/// Lower linear fractional transformation `F_l(P, K)`.
///
/// `p` has inputs `[w; u]` and outputs `[z; y]` where `u` is its last
/// `n_u` inputs and `y` its last `n_y` outputs; `k` maps `y` to `u`. The
/// result maps `w` to `z`, with states `[x_P; x_K]` and a single-node
/// partition.
pub fn lower_lft(
    p: &StateSpaceSystem,
    n_y: usize,
    n_u: usize,
    k: &StateSpaceSystem,
) -> Result<StateSpaceSystem> {
    if n_y > p.n_outputs() || n_u > p.n_inputs() || k.n_inputs() != n_y || k.n_outputs() != n_u {
        return Err(Error::Dimension(format!(
            "LFT of a {}x{} plant with a {}x{} controller on ({n_y}, {n_u}) channels",
            p.n_outputs(),
            p.n_inputs(),
            k.n_outputs(),
            k.n_inputs()
        )));
    }
    let (nz, nw) = (p.n_outputs() - n_y, p.n_inputs() - n_u);
    let np = p.n_states();
    let b1 = p.b().columns(0, nw).into_owned();
    let b2 = p.b().columns(nw, n_u).into_owned();
    let c1 = p.c().rows(0, nz).into_owned();
    let c2 = p.c().rows(nz, n_y).into_owned();
    let d11 = p.d().view((0, 0), (nz, nw)).into_owned();
    let d12 = p.d().view((0, nw), (nz, n_u)).into_owned();
    let d21 = p.d().view((nz, 0), (n_y, nw)).into_owned();
    let d22 = p.d().view((nz, nw), (n_y, n_u)).into_owned();
    let (ak, bk, ck, dk) = (k.a(), k.b(), k.c(), k.d());

    let r = (Mat::identity(n_u, n_u) - dk * &d22)
        .try_inverse()
        .ok_or(Error::IllPosed { sigma_min: 0.0 })?;
    // u = Ux x + Uk xk + Uw w
    let ux = &r * dk * &c2;
    let uk = &r * ck;
    let uw = &r * dk * &d21;
    // y = Yx x + Yk xk + Yw w
    let yx = &c2 + &d22 * &ux;
    let yk = &d22 * &uk;
    let yw = &d21 + &d22 * &uw;

    let a = block(&[
        &[&(p.a() + &b2 * &ux), &(&b2 * &uk)],
        &[&(bk * &yx), &(ak + bk * &yk)],
    ]);
    let b = block(&[&[&(&b1 + &b2 * &uw)], &[&(bk * &yw)]]);
    let c = block(&[&[&(&c1 + &d12 * &ux), &(&d12 * &uk)]]);
    let d = &d11 + &d12 * &uw;
    debug_assert_eq!(a.nrows(), np + k.n_states());
    StateSpaceSystem::new(a, b, c, d)
}
