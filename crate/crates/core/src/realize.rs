//! Realization algorithms: minimal realizations, the column-stacking
//! construction for stable systems, the recursive Kalman construction for
//! chains, and verification of structured realizations.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SparsityPattern;
use crate::numerics::{
    block_diag, controllability_staircase, eigenvalues, max_abs, observability_staircase, Mat,
    Tolerances,
};
use crate::serde_util::one_based;
use crate::stability::{is_hurwitz, pbh, PbhProperty, PbhWitness};
use crate::system::{
    is_structured_matrix, is_structured_tf, systems_equal, IndexSet, StateSpaceSystem,
    StructuredPattern,
};

/// Controllable and observable part of `sys`, computed by a
/// controllability staircase followed by an observability staircase of
/// the controllable part. The state partition is dropped.
pub fn minimal_realization(sys: &StateSpaceSystem, tol: &Tolerances) -> Result<StateSpaceSystem> {
    let n = sys.n_states();
    let (outputs, inputs) = (sys.outputs().clone(), sys.inputs().clone());
    if n == 0 {
        return sys.clone().with_states(None);
    }
    let ctr = controllability_staircase(sys.a(), sys.b(), tol)?;
    let r = ctr.dim;
    let nu = n - r;
    let a_c = ctr.a.view((nu, nu), (r, r)).into_owned();
    let b_c = ctr.port.rows(nu, r).into_owned();
    let c_c = sys.c() * ctr.transform.columns(nu, r);
    let obs = observability_staircase(&a_c, &c_c, tol)?;
    let q = obs.dim;
    let a_m = obs.a.view((0, 0), (q, q)).into_owned();
    let c_m = obs.port.columns(0, q).into_owned();
    let b_m = obs.transform.columns(0, q).transpose() * b_c;
    StateSpaceSystem::partitioned(a_m, b_m, c_m, sys.d().clone(), outputs, inputs, None)
}

/// A nonzero forbidden block of one of the four realization matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixViolation {
    pub matrix: String,
    #[serde(serialize_with = "one_based")]
    pub row_node: usize,
    #[serde(serialize_with = "one_based")]
    pub col_node: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PbhKind {
    Stabilizability,
    Detectability,
}

/// A PBH rank defect, attributed to the node carrying most of the null
/// vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbhFailure {
    pub eig: Complex64,
    pub kind: PbhKind,
    #[serde(serialize_with = "one_based")]
    pub block: usize,
    pub deficiency: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationReport {
    pub accepted: bool,
    pub structured: bool,
    pub violations: Vec<MatrixViolation>,
    pub pbh: Vec<PbhFailure>,
    pub n: Vec<usize>,
}

impl RealizationReport {
    pub fn summary(&self) -> String {
        let mut parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| {
                format!(
                    "{}({}, {}) = {:.3e}",
                    v.matrix,
                    v.row_node + 1,
                    v.col_node + 1,
                    v.magnitude
                )
            })
            .collect();
        parts.extend(self.pbh.iter().map(|f| {
            let what = match f.kind {
                PbhKind::Stabilizability => "unstabilizable",
                PbhKind::Detectability => "undetectable",
            };
            format!("{what} mode {} (node {})", f.eig, f.block + 1)
        }));
        if parts.is_empty() {
            "structured, stabilizable and detectable".into()
        } else {
            parts.join("; ")
        }
    }
}

pub(crate) fn node_of_mass(mass: &[f64], states: &IndexSet) -> usize {
    (0..states.n_nodes())
        .map(|i| (i, states.range(i).map(|p| mass[p]).sum::<f64>()))
        .fold((0, -1.0), |best, (i, w)| if w > best.1 { (i, w) } else { best })
        .0
}

fn failures(witnesses: Vec<PbhWitness>, kind: PbhKind, states: &IndexSet) -> Vec<PbhFailure> {
    witnesses
        .into_iter()
        .map(|w| PbhFailure {
            eig: w.eigenvalue,
            kind,
            block: node_of_mass(&w.mass, states),
            deficiency: w.deficiency,
        })
        .collect()
}

/// Checks that all four matrices respect the pattern under the system's
/// state partition and that the realization is stabilizable and
/// detectable. Failure is reported, not raised.
pub fn verify_structured_realization(
    sys: &StateSpaceSystem,
    pattern: &StructuredPattern,
    tol: &Tolerances,
) -> Result<RealizationReport> {
    let states = sys
        .states()
        .cloned()
        .ok_or_else(|| Error::Input("realization has no state index".into()))?;
    if sys.outputs() != pattern.rows() || sys.inputs() != pattern.cols() {
        return Err(Error::Dimension(format!(
            "system partitions k={:?}, m={:?} differ from the pattern's {:?}, {:?}",
            sys.outputs().dims(),
            sys.inputs().dims(),
            pattern.rows().dims(),
            pattern.cols().dims()
        )));
    }
    let mut violations = Vec::new();
    for (which, p) in sys.matrix_patterns(pattern.sparsity())? {
        let check = is_structured_matrix(sys.matrix(which), &p, tol)?;
        violations.extend(check.violations.into_iter().map(|v| MatrixViolation {
            matrix: which.to_string(),
            row_node: v.row_node,
            col_node: v.col_node,
            magnitude: v.magnitude,
        }));
    }
    let mut fails = failures(
        pbh(sys.a(), sys.b(), PbhProperty::Stabilizable, tol)?.witnesses,
        PbhKind::Stabilizability,
        &states,
    );
    fails.extend(failures(
        pbh(sys.a(), sys.c(), PbhProperty::Detectable, tol)?.witnesses,
        PbhKind::Detectability,
        &states,
    ));
    let structured = violations.is_empty();
    Ok(RealizationReport {
        accepted: structured && fails.is_empty(),
        structured,
        violations,
        pbh: fails,
        n: states.dims().to_vec(),
    })
}

/// A realization that passed [`verify_structured_realization`].
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredRealization {
    sys: StateSpaceSystem,
    pattern: StructuredPattern,
    report: RealizationReport,
}

impl StructuredRealization {
    pub fn verified(sys: StateSpaceSystem, pattern: StructuredPattern, tol: &Tolerances) -> Result<Self> {
        let report = verify_structured_realization(&sys, &pattern, tol)?;
        if !report.accepted {
            return Err(Error::Structure(format!(
                "not a structured stabilizable and detectable realization: {}",
                report.summary()
            )));
        }
        Ok(StructuredRealization {
            sys,
            pattern,
            report,
        })
    }

    pub fn sys(&self) -> &StateSpaceSystem {
        &self.sys
    }

    pub fn pattern(&self) -> &StructuredPattern {
        &self.pattern
    }

    pub fn report(&self) -> &RealizationReport {
        &self.report
    }

    pub fn states(&self) -> &IndexSet {
        self.sys.states().expect("verified realizations carry a state index")
    }

    pub fn into_system(self) -> StateSpaceSystem {
        self.sys
    }

    /// Diagonal blocks `(A_ii, B_ii, C_ii)` of node `i`.
    pub fn diagonal_block(&self, i: usize) -> (Mat, Mat, Mat) {
        let (n, k, m) = (self.states(), self.sys.outputs(), self.sys.inputs());
        let (rn, rk, rm) = (n.range(i), k.range(i), m.range(i));
        (
            self.sys.a().view((rn.start, rn.start), (rn.len(), rn.len())).into_owned(),
            self.sys.b().view((rn.start, rm.start), (rn.len(), rm.len())).into_owned(),
            self.sys.c().view((rk.start, rn.start), (rk.len(), rn.len())).into_owned(),
        )
    }
}

fn check_partitions(sys: &StateSpaceSystem, pattern: &StructuredPattern) -> Result<()> {
    if sys.outputs() != pattern.rows() || sys.inputs() != pattern.cols() {
        return Err(Error::Dimension(format!(
            "system partitions k={:?}, m={:?} differ from the pattern's {:?}, {:?}",
            sys.outputs().dims(),
            sys.inputs().dims(),
            pattern.rows().dims(),
            pattern.cols().dims()
        )));
    }
    Ok(())
}

/// Minimal realizations of each block column placed side by side: `A` and
/// `B` block diagonal, node `j` owning the states of column `j`. Forbidden
/// blocks of `C` and `D` are zeroed. No stability requirement; on unstable
/// systems the result is typically not stabilizable or detectable.
pub fn column_realization(
    sys: &StateSpaceSystem,
    pattern: &StructuredPattern,
    tol: &Tolerances,
) -> Result<StateSpaceSystem> {
    check_partitions(sys, pattern)?;
    let nn = sys.n_nodes();
    let ins = sys.inputs();
    let mut cols = Vec::with_capacity(nn);
    for j in 0..nn {
        let r = ins.range(j);
        let mut only_j = vec![0; nn];
        only_j[j] = r.len();
        let column = StateSpaceSystem::partitioned(
            sys.a().clone(),
            sys.b().columns(r.start, r.len()).into_owned(),
            sys.c().clone(),
            sys.d().columns(r.start, r.len()).into_owned(),
            sys.outputs().clone(),
            IndexSet::new(only_j),
            None,
        )?;
        cols.push(minimal_realization(&column, tol)?);
    }
    let a = block_diag(&cols.iter().map(|c| c.a()).collect::<Vec<_>>());
    let b = block_diag(&cols.iter().map(|c| c.b()).collect::<Vec<_>>());
    let c_blocks: Vec<&Mat> = cols.iter().map(|c| c.c()).collect();
    let c = crate::numerics::block(&[&c_blocks]);
    let states = IndexSet::new(cols.iter().map(|c| c.n_states()).collect());
    let mut out = StateSpaceSystem::partitioned(
        a,
        b,
        c,
        sys.d().clone(),
        sys.outputs().clone(),
        sys.inputs().clone(),
        Some(states),
    )?;
    out.project_structure(pattern.sparsity())?;
    Ok(out)
}

fn ensure_equal(a: &StateSpaceSystem, b: &StateSpaceSystem, tol: &Tolerances, what: &str) -> Result<()> {
    if systems_equal(a, b, tol)? {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what} changed the transfer matrix")))
    }
}

/// Structured realization of a stable structured system by column
/// stacking.
pub fn realize_stable(
    sys: &StateSpaceSystem,
    pattern: &StructuredPattern,
    tol: &Tolerances,
) -> Result<StructuredRealization> {
    check_partitions(sys, pattern)?;
    let min = minimal_realization(sys, tol)?;
    let unstable = match is_hurwitz(min.a(), tol) {
        Ok(h) => !h.hurwitz,
        Err(Error::Marginal { .. }) => true,
        Err(e) => return Err(e),
    };
    if unstable {
        let worst = eigenvalues(min.a())?
            .into_iter()
            .max_by(|x, y| x.re.total_cmp(&y.re))
            .unwrap();
        return Err(Error::Precondition(format!(
            "system is not stable: pole at {worst}"
        )));
    }
    let check = is_structured_tf(sys, pattern, tol)?;
    if !check.structured {
        let blocks: Vec<String> = check
            .violations
            .iter()
            .map(|v| format!("({}, {})", v.row_node + 1, v.col_node + 1))
            .collect();
        return Err(Error::Structure(format!(
            "transfer matrix is nonzero in forbidden blocks {}",
            blocks.join(", ")
        )));
    }
    let out = column_realization(sys, pattern, tol)?;
    ensure_equal(&out, sys, tol, "column realization")?;
    StructuredRealization::verified(out, pattern.clone(), tol)
}

/// Structured realization over the chain `1 -> 2 -> ... -> N` (full lower
/// triangular pattern on the system's own node order).
///
/// Starting from a minimal realization, node `i` receives the states that
/// are observable from `y_i` together with the unobservable states not
/// controllable from `u_{i+1}, ..., u_N`; the remaining states (controllable
/// from later inputs, unobservable from `y_i`) are handed to the next node.
/// The transformation is orthogonal, so the order stays minimal.
pub fn realize_chain(sys: &StateSpaceSystem, tol: &Tolerances) -> Result<StructuredRealization> {
    let nn = sys.n_nodes();
    let chain = SparsityPattern::lower_triangular(nn);
    let pattern = sys.io_pattern(&chain)?;
    let check = is_structured_tf(sys, &pattern, tol)?;
    if !check.structured {
        let v = &check.violations[0];
        return Err(Error::Structure(format!(
            "transfer matrix is not block lower triangular: block ({}, {}) is nonzero",
            v.row_node + 1,
            v.col_node + 1
        )));
    }
    let min = minimal_realization(sys, tol)?;
    let n = min.n_states();
    let (outs, ins) = (sys.outputs(), sys.inputs());
    let scale = max_abs(min.a()).max(max_abs(min.b())).max(max_abs(min.c()));
    let leak_tol = 1e4 * tol.rank_cutoff(scale);
    let mut t = Mat::identity(n, n);
    let mut dims = vec![0usize; nn];
    let mut off = 0usize;
    for i in 0..nn {
        let rem = n - off;
        if i + 1 == nn {
            dims[i] = rem;
            break;
        }
        if rem == 0 {
            continue;
        }
        let tr = t.columns(off, rem).into_owned();
        let a_r = tr.transpose() * min.a() * &tr;
        let c_i = min.c().rows(outs.offset(i), outs.dim(i)) * &tr;
        let later = ins.offset(i + 1);
        let b_later = tr.transpose() * min.b().columns(later, ins.total() - later);

        let obs = observability_staircase(&a_r, &c_i, tol)?;
        let no = obs.dim;
        let b_obs = obs.transform.transpose() * b_later;
        // The zero block has no controllable and observable part.
        let leak = max_abs(&b_obs.rows(0, no).into_owned());
        if leak > leak_tol {
            return Err(Error::Numerical(format!(
                "node {}: observable states are driven by later inputs ({leak:.3e})",
                i + 1
            )));
        }
        let nuo = rem - no;
        let a_uo = obs.a.view((no, no), (nuo, nuo)).into_owned();
        let ctr = controllability_staircase(&a_uo, &b_obs.rows(no, nuo).into_owned(), tol)?;
        let keep = no + (nuo - ctr.dim);
        let mut step = Mat::identity(rem, rem);
        step.view_mut((no, no), (nuo, nuo)).copy_from(&ctr.transform);
        let cols = tr * obs.transform * step;
        t.columns_mut(off, rem).copy_from(&cols);
        dims[i] = keep;
        off += keep;
    }
    let mut out = min.transformed(&t.transpose(), &t, Some(IndexSet::new(dims)))?;
    out.project_structure(&chain)?;
    ensure_equal(&out, sys, tol, "chain realization")?;
    StructuredRealization::verified(out, pattern, tol)
}
