//! Rational transfer-matrix ingestion.
//!
//! Entries are SISO rational functions with coefficients listed
//! highest-degree first. [`tf_to_ss`] realizes each entry in controllable
//! canonical form and stacks them column by column; the result carries a
//! state partition that assigns every entry's states to the node owning its
//! input column, so a spec that respects a sparsity pattern yields a
//! structured (though generally non-minimal) realization.

use num_complex::Complex64;

use super::{IndexSet, StateSpaceSystem};
use crate::error::{Error, Result};
use crate::graph::SparsityPattern;
use crate::numerics::{block_diag, Mat};

/// One scalar entry at 0-based `(row, col)` of the full transfer matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TfEntry {
    pub row: usize,
    pub col: usize,
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

fn trim(c: &[f64]) -> &[f64] {
    let first = c.iter().position(|&x| x != 0.0).unwrap_or(c.len());
    &c[first..]
}

fn horner(c: &[f64], s: Complex64) -> Complex64 {
    c.iter().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * s + x)
}

impl TfEntry {
    pub fn evaluate(&self, s: Complex64) -> Complex64 {
        horner(&self.num, s) / horner(&self.den, s)
    }

    /// Controllable canonical realization `(A, b, c, d)`.
    fn realize(&self) -> (Mat, Mat, Mat, f64) {
        let den = trim(&self.den);
        let lead = den[0];
        let a: Vec<f64> = den.iter().map(|x| x / lead).collect();
        let deg = a.len() - 1;
        let num = trim(&self.num);
        let mut b = vec![0.0; deg + 1];
        for (i, x) in num.iter().enumerate() {
            b[deg + 1 - num.len() + i] = x / lead;
        }
        let d = b[0];
        let mut am = Mat::zeros(deg, deg);
        for i in 0..deg.saturating_sub(1) {
            am[(i, i + 1)] = 1.0;
        }
        let mut c = Mat::zeros(1, deg);
        for i in 0..deg {
            // coefficient of s^i in the strictly proper numerator
            let k = deg - i;
            if deg > 0 {
                am[(deg - 1, i)] = -a[k];
            }
            c[(0, i)] = b[k] - d * a[k];
        }
        let mut bm = Mat::zeros(deg, 1);
        if deg > 0 {
            bm[(deg - 1, 0)] = 1.0;
        }
        (am, bm, c, d)
    }
}

/// A rational transfer matrix given entry by entry. Absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSpec {
    outputs: IndexSet,
    inputs: IndexSet,
    entries: Vec<TfEntry>,
}

impl TransferSpec {
    pub fn new(outputs: IndexSet, inputs: IndexSet, mut entries: Vec<TfEntry>) -> Result<Self> {
        if outputs.n_nodes() != inputs.n_nodes() {
            return Err(Error::Dimension("k and m must have the same number of nodes".into()));
        }
        let (k, m) = (outputs.total(), inputs.total());
        for e in &entries {
            let label = format!("entry ({}, {})", e.row + 1, e.col + 1);
            if e.row >= k || e.col >= m {
                return Err(Error::Input(format!("{label} is outside a {k}x{m} matrix")));
            }
            if e.num.iter().chain(&e.den).any(|x| !x.is_finite()) {
                return Err(Error::Input(format!("{label} has non-finite coefficients")));
            }
            let den = trim(&e.den);
            if den.is_empty() {
                return Err(Error::Input(format!("{label} has a zero denominator")));
            }
            if trim(&e.num).len() > den.len() {
                return Err(Error::Input(format!("{label} is improper")));
            }
        }
        entries.sort_by_key(|e| (e.col, e.row));
        if entries
            .windows(2)
            .any(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col))
        {
            return Err(Error::Input("duplicate transfer-function entry".into()));
        }
        Ok(TransferSpec {
            outputs,
            inputs,
            entries,
        })
    }

    pub fn outputs(&self) -> &IndexSet {
        &self.outputs
    }

    pub fn inputs(&self) -> &IndexSet {
        &self.inputs
    }

    pub fn entries(&self) -> &[TfEntry] {
        &self.entries
    }

    /// Direct rational evaluation, entry by entry.
    pub fn evaluate(&self, s: Complex64) -> nalgebra::DMatrix<Complex64> {
        let mut g = nalgebra::DMatrix::zeros(self.outputs.total(), self.inputs.total());
        for e in &self.entries {
            g[(e.row, e.col)] = e.evaluate(s);
        }
        g
    }

    /// Entries sitting in blocks the pattern forbids (nonzero numerators only).
    pub fn forbidden_entries(&self, sparsity: &SparsityPattern) -> Vec<(usize, usize)> {
        self.entries
            .iter()
            .filter(|e| !trim(&e.num).is_empty())
            .filter(|e| {
                let i = self.outputs.node_of(e.row).unwrap();
                let j = self.inputs.node_of(e.col).unwrap();
                !sparsity.allows(i, j)
            })
            .map(|e| (e.row, e.col))
            .collect()
    }
}

/// Column-stacked realization of a transfer spec.
pub fn tf_to_ss(spec: &TransferSpec) -> Result<StateSpaceSystem> {
    let (k, m) = (spec.outputs.total(), spec.inputs.total());
    let mut a_blocks = Vec::new();
    let mut b_cols: Vec<(usize, Mat)> = Vec::new();
    let mut c_rows: Vec<(usize, Mat)> = Vec::new();
    let mut d = Mat::zeros(k, m);
    let n_nodes = spec.inputs.n_nodes();
    let mut state_dims = vec![0usize; n_nodes];
    for e in &spec.entries {
        let (a, b, c, dd) = e.realize();
        d[(e.row, e.col)] += dd;
        state_dims[spec.inputs.node_of(e.col).unwrap()] += a.nrows();
        b_cols.push((e.col, b));
        c_rows.push((e.row, c));
        a_blocks.push(a);
    }
    // Entries are sorted by column, so states are already grouped by input
    // node in node order.
    let a = block_diag(&a_blocks.iter().collect::<Vec<_>>());
    let n = a.nrows();
    let mut b = Mat::zeros(n, m);
    let mut c = Mat::zeros(k, n);
    let mut off = 0;
    for ((col, bb), (row, cc)) in b_cols.iter().zip(&c_rows) {
        let len = bb.nrows();
        b.view_mut((off, *col), (len, 1)).copy_from(bb);
        c.view_mut((*row, off), (1, len)).copy_from(cc);
        off += len;
    }
    StateSpaceSystem::partitioned(
        a,
        b,
        c,
        d,
        spec.outputs.clone(),
        spec.inputs.clone(),
        Some(IndexSet::new(state_dims)),
    )
}
