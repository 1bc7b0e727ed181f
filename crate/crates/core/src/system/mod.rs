//! Structured block systems.
//!
//! Transfer matrices are carried as state-space data everywhere. A system's
//! inputs, outputs and (optionally) states are partitioned across graph
//! nodes by [`IndexSet`]s; a [`StructuredPattern`] pairs a sparsity mask with
//! a row and a column partition and says which blocks may be nonzero.
//!
//! Index sets may contain zeros. Blocks of a zero-size partition are `0 x p`
//! or `p x 0` matrices and take part in every assembly like any other block.

mod eval;
mod ops;
mod transfer;

pub use eval::{
    evaluate, feedthrough, is_structured_tf, probe_points, systems_equal, transfer_deviation,
};
pub use ops::{interleave_states, lower_lft, parallel, series};
pub use transfer::{tf_to_ss, TfEntry, TransferSpec};

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SparsityPattern;
use crate::numerics::{ensure_finite, Mat, Tolerances};

/// Per-node block sizes `(d_1, ..., d_N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl IndexSet {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &d in &dims {
            acc += d;
            offsets.push(acc);
        }
        IndexSet { dims, offsets }
    }

    pub fn uniform(n_nodes: usize, d: usize) -> Self {
        IndexSet::new(vec![d; n_nodes])
    }

    pub fn single(d: usize) -> Self {
        IndexSet::new(vec![d])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_nodes(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn dim(&self, node: usize) -> usize {
        self.dims[node]
    }

    pub fn offset(&self, node: usize) -> usize {
        self.offsets[node]
    }

    pub fn range(&self, node: usize) -> Range<usize> {
        self.offsets[node]..self.offsets[node + 1]
    }

    /// Nodes with a nonzero block.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dims.len()).filter(|&i| self.dims[i] != 0).collect()
    }

    /// Node owning a scalar coordinate.
    pub fn node_of(&self, coord: usize) -> Option<usize> {
        (0..self.dims.len()).find(|&i| self.range(i).contains(&coord))
    }
}

/// A forbidden block carrying a nonzero value. Node indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockViolation {
    pub row_node: usize,
    pub col_node: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureCheck {
    pub structured: bool,
    pub violations: Vec<BlockViolation>,
}

impl StructureCheck {
    fn from_violations(violations: Vec<BlockViolation>) -> Self {
        StructureCheck {
            structured: violations.is_empty(),
            violations,
        }
    }
}

/// `S(F, rows, cols)`: a sparsity mask with row and column partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredPattern {
    sparsity: SparsityPattern,
    rows: IndexSet,
    cols: IndexSet,
}

impl StructuredPattern {
    pub fn new(sparsity: SparsityPattern, rows: IndexSet, cols: IndexSet) -> Result<Self> {
        let n = sparsity.n_nodes();
        if rows.n_nodes() != n || cols.n_nodes() != n {
            return Err(Error::Dimension(format!(
                "pattern over {n} nodes with index sets of lengths {} and {}",
                rows.n_nodes(),
                cols.n_nodes()
            )));
        }
        Ok(StructuredPattern {
            sparsity,
            rows,
            cols,
        })
    }

    pub fn sparsity(&self) -> &SparsityPattern {
        &self.sparsity
    }

    pub fn rows(&self) -> &IndexSet {
        &self.rows
    }

    pub fn cols(&self) -> &IndexSet {
        &self.cols
    }

    pub fn allows(&self, row_node: usize, col_node: usize) -> bool {
        self.sparsity.allows(row_node, col_node)
    }

    /// Same mask with new partitions.
    pub fn with_index(&self, rows: IndexSet, cols: IndexSet) -> Result<Self> {
        StructuredPattern::new(self.sparsity.clone(), rows, cols)
    }

    /// Controller-side pattern `S(m, k)` for a plant pattern `S(k, m)`.
    pub fn controller(&self) -> Self {
        StructuredPattern {
            sparsity: self.sparsity.clone(),
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Zeroes every forbidden block in place and returns the largest entry
    /// removed.
    pub fn project(&self, m: &mut Mat) -> f64 {
        let mut removed = 0.0f64;
        let n = self.sparsity.n_nodes();
        for i in 0..n {
            for j in 0..n {
                if self.allows(i, j) {
                    continue;
                }
                let (r, c) = (self.rows.range(i), self.cols.range(j));
                let mut v = m.view_mut((r.start, c.start), (r.len(), c.len()));
                removed = removed.max(v.iter().fold(0.0, |a, x| a.max(x.abs())));
                v.fill(0.0);
            }
        }
        removed
    }
}

/// Membership of a real matrix in `S(R, rows, cols)`: every forbidden block
/// must be entrywise at most `rank_tol` in magnitude.
pub fn is_structured_matrix(
    m: &Mat,
    pattern: &StructuredPattern,
    tol: &Tolerances,
) -> Result<StructureCheck> {
    if m.shape() != (pattern.rows.total(), pattern.cols.total()) {
        return Err(Error::Dimension(format!(
            "matrix is {:?} but the pattern partitions {}x{}",
            m.shape(),
            pattern.rows.total(),
            pattern.cols.total()
        )));
    }
    let n = pattern.sparsity.n_nodes();
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if pattern.allows(i, j) {
                continue;
            }
            let (r, c) = (pattern.rows.range(i), pattern.cols.range(j));
            let mag = m
                .view((r.start, c.start), (r.len(), c.len()))
                .iter()
                .fold(0.0f64, |a, x| a.max(x.abs()));
            if mag > tol.rank_tol {
                violations.push(BlockViolation {
                    row_node: i,
                    col_node: j,
                    magnitude: mag,
                });
            }
        }
    }
    Ok(StructureCheck::from_violations(violations))
}

/// Continuous-time state-space system `(A, B, C, D)` with partitioned
/// inputs and outputs and an optional state partition.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceSystem {
    a: Mat,
    b: Mat,
    c: Mat,
    d: Mat,
    outputs: IndexSet,
    inputs: IndexSet,
    states: Option<IndexSet>,
}

impl StateSpaceSystem {
    /// A system with a single-node partition of inputs and outputs.
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let (k, m) = (d.nrows(), d.ncols());
        StateSpaceSystem::partitioned(a, b, c, d, IndexSet::single(k), IndexSet::single(m), None)
    }

    pub fn partitioned(
        a: Mat,
        b: Mat,
        c: Mat,
        d: Mat,
        outputs: IndexSet,
        inputs: IndexSet,
        states: Option<IndexSet>,
    ) -> Result<Self> {
        let n = a.nrows();
        let (k, m) = (d.nrows(), d.ncols());
        if !a.is_square() || b.shape() != (n, m) || c.shape() != (k, n) {
            return Err(Error::Dimension(format!(
                "A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        for (m_, name) in [(&a, "A"), (&b, "B"), (&c, "C"), (&d, "D")] {
            ensure_finite(m_, name)?;
        }
        if outputs.total() != k || inputs.total() != m {
            return Err(Error::Dimension(format!(
                "index sets k={:?}, m={:?} do not match a {k}x{m} system",
                outputs.dims(),
                inputs.dims()
            )));
        }
        if let Some(s) = &states {
            if s.total() != n || s.n_nodes() != outputs.n_nodes() {
                return Err(Error::Dimension(format!(
                    "state index {:?} does not match {n} states over {} nodes",
                    s.dims(),
                    outputs.n_nodes()
                )));
            }
        }
        if outputs.n_nodes() != inputs.n_nodes() {
            return Err(Error::Dimension(format!(
                "output and input index sets have {} and {} nodes",
                outputs.n_nodes(),
                inputs.n_nodes()
            )));
        }
        Ok(StateSpaceSystem {
            a,
            b,
            c,
            d,
            outputs,
            inputs,
            states,
        })
    }

    /// Static gain `D` with no states.
    pub fn static_gain(d: Mat, outputs: IndexSet, inputs: IndexSet) -> Result<Self> {
        let (k, m) = d.shape();
        let n_nodes = outputs.n_nodes();
        StateSpaceSystem::partitioned(
            Mat::zeros(0, 0),
            Mat::zeros(0, m),
            Mat::zeros(k, 0),
            d,
            outputs,
            inputs,
            Some(IndexSet::uniform(n_nodes, 0)),
        )
    }

    pub fn zero(outputs: IndexSet, inputs: IndexSet) -> Result<Self> {
        let d = Mat::zeros(outputs.total(), inputs.total());
        StateSpaceSystem::static_gain(d, outputs, inputs)
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    pub fn c(&self) -> &Mat {
        &self.c
    }
    pub fn d(&self) -> &Mat {
        &self.d
    }
    pub fn outputs(&self) -> &IndexSet {
        &self.outputs
    }
    pub fn inputs(&self) -> &IndexSet {
        &self.inputs
    }
    pub fn states(&self) -> Option<&IndexSet> {
        self.states.as_ref()
    }
    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_inputs(&self) -> usize {
        self.d.ncols()
    }
    pub fn n_outputs(&self) -> usize {
        self.d.nrows()
    }
    pub fn n_nodes(&self) -> usize {
        self.outputs.n_nodes()
    }

    pub fn into_parts(self) -> (Mat, Mat, Mat, Mat) {
        (self.a, self.b, self.c, self.d)
    }

    /// Replaces the input/output partition; the state partition is dropped
    /// when the node count changes.
    pub fn with_partition(self, outputs: IndexSet, inputs: IndexSet) -> Result<Self> {
        let states = self.states.filter(|s| s.n_nodes() == outputs.n_nodes());
        StateSpaceSystem::partitioned(self.a, self.b, self.c, self.d, outputs, inputs, states)
    }

    pub fn with_states(self, states: Option<IndexSet>) -> Result<Self> {
        StateSpaceSystem::partitioned(
            self.a,
            self.b,
            self.c,
            self.d,
            self.outputs,
            self.inputs,
            states,
        )
    }

    /// `(T^{-1} A T, T^{-1} B, C T, D)`; the state partition is dropped.
    pub fn similarity(&self, t: &Mat) -> Result<Self> {
        let tinv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("similarity transform is singular".into()))?;
        self.transformed(&tinv, t, None)
    }

    /// `(L A R, L B, C R, D)` with an explicit state partition.
    pub(crate) fn transformed(&self, left: &Mat, right: &Mat, states: Option<IndexSet>) -> Result<Self> {
        StateSpaceSystem::partitioned(
            left * &self.a * right,
            left * &self.b,
            &self.c * right,
            self.d.clone(),
            self.outputs.clone(),
            self.inputs.clone(),
            states,
        )
    }

    /// Reorders states so new state `p` is old state `perm[p]`.
    pub fn permute_states(&self, perm: &[usize], states: Option<IndexSet>) -> Result<Self> {
        let p = crate::numerics::permutation_matrix(perm);
        self.transformed(&p.transpose(), &p, states)
    }

    /// The subsystem from the inputs of `in_nodes` to the outputs of
    /// `out_nodes`, keeping every state.
    pub fn subsystem(&self, out_nodes: &[usize], in_nodes: &[usize]) -> Result<Self> {
        let rows: Vec<usize> = out_nodes.iter().flat_map(|&i| self.outputs.range(i)).collect();
        let cols: Vec<usize> = in_nodes.iter().flat_map(|&j| self.inputs.range(j)).collect();
        let b = self.b.select_columns(&cols);
        let c = self.c.select_rows(&rows);
        let d = self.d.select_rows(&rows).select_columns(&cols);
        let outputs = IndexSet::new(out_nodes.iter().map(|&i| self.outputs.dim(i)).collect());
        let inputs = IndexSet::new(in_nodes.iter().map(|&j| self.inputs.dim(j)).collect());
        StateSpaceSystem::partitioned(self.a.clone(), b, c, d, outputs, inputs, None)
    }

    /// Pattern `S(k, m)` of this system's input/output partition.
    pub fn io_pattern(&self, sparsity: &SparsityPattern) -> Result<StructuredPattern> {
        StructuredPattern::new(sparsity.clone(), self.outputs.clone(), self.inputs.clone())
    }

    /// Patterns for `A, B, C, D` given the state partition.
    pub fn matrix_patterns(
        &self,
        sparsity: &SparsityPattern,
    ) -> Result<[(char, StructuredPattern); 4]> {
        let n = self
            .states
            .clone()
            .ok_or_else(|| Error::Input("system has no state partition".into()))?;
        let (k, m) = (self.outputs.clone(), self.inputs.clone());
        let mk = |r: &IndexSet, c: &IndexSet| StructuredPattern::new(sparsity.clone(), r.clone(), c.clone());
        Ok([
            ('A', mk(&n, &n)?),
            ('B', mk(&n, &m)?),
            ('C', mk(&k, &n)?),
            ('D', mk(&k, &m)?),
        ])
    }

    pub(crate) fn matrix(&self, which: char) -> &Mat {
        match which {
            'A' => &self.a,
            'B' => &self.b,
            'C' => &self.c,
            _ => &self.d,
        }
    }

    /// Zeroes forbidden blocks of all four matrices; returns the largest
    /// removed entry.
    pub(crate) fn project_structure(&mut self, sparsity: &SparsityPattern) -> Result<f64> {
        let pats = self.matrix_patterns(sparsity)?;
        let mut removed = 0.0f64;
        for (which, p) in pats {
            let m = match which {
                'A' => &mut self.a,
                'B' => &mut self.b,
                'C' => &mut self.c,
                _ => &mut self.d,
            };
            removed = removed.max(p.project(m));
        }
        Ok(removed)
    }
}
