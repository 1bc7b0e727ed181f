//! Parameterization of structured stabilizing controllers as `F_l(J, Q)`
//! for stable structured `Q`.
//!
//! ```text
//!       [ A + B F + L C + L D F | -L   B + L D ]
//!   J = [ F                     |  0   I       ]
//!       [ -(C + D F)            |  I   -D      ]
//! ```

use serde::Serialize;

use super::{observer_controller, GainSchedule};
use crate::error::{Error, Result};
use crate::numerics::{block, max_abs, singular_values, Mat, Tolerances};
use crate::realize::{realize_stable, StructuredRealization};
use crate::stability::{internal_stability_ss, is_hurwitz, ClosedLoopReport};
use crate::system::{
    interleave_states, is_structured_matrix, lower_lft, transfer_deviation, IndexSet,
    StateSpaceSystem,
};

const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct YoulaGenerator {
    plant: StructuredRealization,
    gains: GainSchedule,
    j: StateSpaceSystem,
}

impl YoulaGenerator {
    pub fn plant(&self) -> &StructuredRealization {
        &self.plant
    }

    pub fn gains(&self) -> &GainSchedule {
        &self.gains
    }

    /// `J` with inputs `[y; v]` and outputs `[u; w]`, unpartitioned.
    pub fn j(&self) -> &StateSpaceSystem {
        &self.j
    }

    /// Sub-block `J_rc` (1-based `r`, `c` as in the block layout) with the
    /// plant's node partitions and state index.
    pub fn sub_block(&self, r: usize, c: usize) -> Result<StateSpaceSystem> {
        let g = self.plant.sys();
        let (k, m) = (g.outputs().clone(), g.inputs().clone());
        let (rows, row_idx) = match r {
            1 => (0..m.total(), m.clone()),
            _ => (m.total()..m.total() + k.total(), k.clone()),
        };
        let (cols, col_idx) = match c {
            1 => (0..k.total(), k),
            _ => (k.total()..k.total() + m.total(), m),
        };
        StateSpaceSystem::partitioned(
            self.j.a().clone(),
            self.j.b().columns(cols.start, cols.len()).into_owned(),
            self.j.c().rows(rows.start, rows.len()).into_owned(),
            self.j.d().view((rows.start, cols.start), (rows.len(), cols.len())).into_owned(),
            row_idx,
            col_idx,
            Some(self.plant.states().clone()),
        )
    }
}

fn check_hurwitz(m: &Mat, what: &str, tol: &Tolerances) -> Result<()> {
    match is_hurwitz(m, tol) {
        Ok(h) if h.hurwitz => Ok(()),
        Ok(h) => Err(Error::Input(format!("{what} is not Hurwitz (abscissa {:e})", h.abscissa))),
        Err(Error::Marginal { abscissa }) => Err(Error::Input(format!(
            "{what} has a marginal eigenvalue (abscissa {abscissa:e})"
        ))),
        Err(e) => Err(e),
    }
}

/// Assembles `J` and checks that its four sub-blocks are structured.
pub fn build_youla_generator(
    plant: &StructuredRealization,
    gains: &GainSchedule,
    tol: &Tolerances,
) -> Result<YoulaGenerator> {
    let k0 = observer_controller(plant, gains)?;
    let g = plant.sys();
    let (f, l) = (&gains.f_d, &gains.l_d);
    check_hurwitz(&(g.a() + g.b() * f), "A + B F_d", tol)?;
    check_hurwitz(&(g.a() + l * g.c()), "A + L_d C", tol)?;
    let (k, m) = (g.n_outputs(), g.n_inputs());
    let b_v = g.b() + l * g.d();
    let c_w = -(g.c() + g.d() * f);
    let j = StateSpaceSystem::new(
        k0.a().clone(),
        block(&[&[&(-l), &b_v]]),
        block(&[&[f], &[&c_w]]),
        block(&[
            &[&Mat::zeros(m, k), &Mat::identity(m, m)],
            &[&Mat::identity(k, k), &(-g.d())],
        ]),
    )?;
    let gen = YoulaGenerator {
        plant: plant.clone(),
        gains: gains.clone(),
        j,
    };
    for (r, c) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let blk = gen.sub_block(r, c)?;
        for (which, p) in blk.matrix_patterns(plant.pattern().sparsity())? {
            let chk = is_structured_matrix(blk.matrix(which), &p, tol)?;
            if !chk.structured {
                return Err(Error::Synthesis(format!(
                    "J{r}{c} has an unstructured {which} matrix"
                )));
            }
        }
    }
    Ok(gen)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LftClosure {
    #[serde(skip)]
    pub controller: StructuredRealization,
    #[serde(skip)]
    pub parameter: StructuredRealization,
    /// Max-abs residual of the Hurwitz-verification identity.
    pub identity_residual: f64,
    /// Probe deviation between the explicit realization and the generic
    /// LFT formula.
    pub lft_deviation: f64,
    /// Largest entry zeroed in forbidden blocks (rounding only).
    pub projected: f64,
    pub closed_loop: ClosedLoopReport,
}

/// Realizes `K = F_l(J, Q)` from explicit star-product formulas.
///
/// `Q` is first given a structured realization by column stacking, which
/// also validates its stability and structure. States `[x; x_Q]` are then
/// interleaved node by node so that all four controller matrices are
/// structured.
pub fn close_lft(gen: &YoulaGenerator, q: &StateSpaceSystem, tol: &Tolerances) -> Result<LftClosure> {
    let plant = gen.plant.sys();
    let pattern = gen.plant.pattern().controller();
    if q.outputs() != plant.inputs() || q.inputs() != plant.outputs() {
        return Err(Error::Dimension(format!(
            "Q has partitions {:?} x {:?}, expected {:?} x {:?}",
            q.outputs().dims(),
            q.inputs().dims(),
            plant.inputs().dims(),
            plant.outputs().dims()
        )));
    }
    let qr = realize_stable(q, &pattern, tol)?;
    let (aq, bq, cq, dq) = (qr.sys().a(), qr.sys().b(), qr.sys().c(), qr.sys().d());
    let (a, b, c, d) = (plant.a(), plant.b(), plant.c(), plant.d());
    let (f, l) = (&gen.gains.f_d, &gen.gains.l_d);
    let (k, m) = (plant.n_outputs(), plant.n_inputs());

    let well = Mat::identity(k, k) + d * dq;
    let sv = singular_values(&well);
    if let (Some(&hi), Some(&lo)) = (sv.first(), sv.last()) {
        if lo <= tol.rank_cutoff(hi) {
            return Err(Error::IllPosed { sigma_min: lo });
        }
    }
    let r = well.try_inverse().ok_or(Error::IllPosed { sigma_min: 0.0 })?;
    let rt = (Mat::identity(m, m) + dq * d)
        .try_inverse()
        .ok_or(Error::IllPosed { sigma_min: 0.0 })?;

    let a_j = gen.j.a();
    let b_v = b + l * d;
    let c_w = c + d * f;
    let a11 = a_j - &b_v * &rt * dq * &c_w;
    let a12 = &b_v * &rt * cq;
    let a21 = -(bq * &r * &c_w);
    let a22 = aq - bq * &r * d * cq;
    let b1 = -l + &b_v * &rt * dq;
    let b2 = bq * &r;
    let c1 = f - &rt * dq * &c_w;
    let c2 = &rt * cq;
    let d_hat = &rt * dq;

    let a_hat = block(&[&[&a11, &a12], &[&a21, &a22]]);
    let b_hat = block(&[&[&b1], &[&b2]]);
    let c_hat = block(&[&[&c1, &c2]]);

    let target = block(&[
        &[&(a + b * f), &(b * cq)],
        &[&Mat::zeros(aq.nrows(), a.ncols()), aq],
    ]);
    let identity_residual = max_abs(&(&a_hat + &b_hat * block(&[&[&c_w, &(d * cq)]]) - target));
    if identity_residual > IDENTITY_TOL {
        return Err(Error::Numerical(format!(
            "star-product identity residual {identity_residual:e} exceeds {IDENTITY_TOL:e}"
        )));
    }

    let (perm, states): (Vec<usize>, IndexSet) =
        interleave_states(&[gen.plant.states(), qr.states()])?;
    let mut kk = StateSpaceSystem::partitioned(
        a_hat,
        b_hat,
        c_hat,
        d_hat,
        plant.inputs().clone(),
        plant.outputs().clone(),
        None,
    )?
    .permute_states(&perm, Some(states))?;
    let projected = kk.project_structure(pattern.sparsity())?;

    let generic = lower_lft(&gen.j, k, m, qr.sys())?;
    let lft_deviation = transfer_deviation(&kk, &generic, tol)?;
    if lft_deviation > tol.match_tol {
        return Err(Error::Numerical(format!(
            "star-product realization disagrees with the generic LFT ({lft_deviation:e})"
        )));
    }
    let closed_loop = internal_stability_ss(plant, &kk, tol)?;
    let controller = StructuredRealization::verified(kk, pattern, tol)?;
    Ok(LftClosure {
        controller,
        parameter: qr,
        identity_residual,
        lft_deviation,
        projected,
        closed_loop,
    })
}
