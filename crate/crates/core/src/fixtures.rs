//! The worked examples: the two-node plant `G1`, the four-node plant `G2`
//! that has no structured realization, and a two-node plant that has a
//! structured realization but no structured stabilizing controller.

use crate::graph::{adjacency, Graph, SparsityPattern};
use crate::numerics::Mat;
use crate::system::{IndexSet, StateSpaceSystem, TfEntry, TransferSpec};

fn diag(v: &[f64]) -> Mat {
    Mat::from_diagonal(&nalgebra::DVector::from_row_slice(v))
}

/// Two nodes, `1 -> 2`.
pub fn s1_graph() -> Graph {
    Graph::with_self_loops(2, [(0, 1)]).expect("valid graph")
}

pub fn s1() -> SparsityPattern {
    adjacency(&s1_graph()).expect("valid graph")
}

/// Four nodes, `1 -> 3`, `1 -> 4`, `2 -> 3`, `2 -> 4`.
pub fn s2_graph() -> Graph {
    Graph::with_self_loops(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).expect("valid graph")
}

pub fn s2() -> SparsityPattern {
    adjacency(&s2_graph()).expect("valid graph")
}

/// `G1 = [[1/(s+1), 0], [1/(s+1), 1/(s+2)]]` with its diagonal realization.
pub fn g1_ss() -> StateSpaceSystem {
    StateSpaceSystem::partitioned(
        diag(&[-1.0, -2.0]),
        Mat::identity(2, 2),
        Mat::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]),
        Mat::zeros(2, 2),
        IndexSet::uniform(2, 1),
        IndexSet::uniform(2, 1),
        Some(IndexSet::uniform(2, 1)),
    )
    .expect("consistent dimensions")
}

fn entry(row: usize, col: usize, num: &[f64], den: &[f64]) -> TfEntry {
    TfEntry {
        row,
        col,
        num: num.to_vec(),
        den: den.to_vec(),
    }
}

pub fn g1_tf() -> TransferSpec {
    TransferSpec::new(
        IndexSet::uniform(2, 1),
        IndexSet::uniform(2, 1),
        vec![
            entry(0, 0, &[1.0], &[1.0, 1.0]),
            entry(1, 0, &[1.0], &[1.0, 1.0]),
            entry(1, 1, &[1.0], &[1.0, 2.0]),
        ],
    )
    .expect("proper entries")
}

/// `1/(s-1)` in blocks `(3,1), (3,2), (4,1), (4,2)`, zero elsewhere.
pub fn g2_tf() -> TransferSpec {
    let e = |r, c| entry(r, c, &[1.0], &[1.0, -1.0]);
    TransferSpec::new(
        IndexSet::uniform(4, 1),
        IndexSet::uniform(4, 1),
        vec![e(2, 0), e(2, 1), e(3, 0), e(3, 1)],
    )
    .expect("proper entries")
}

/// The order-one minimal realization of `G2` (no state index).
pub fn g2_minimal() -> StateSpaceSystem {
    StateSpaceSystem::partitioned(
        Mat::from_element(1, 1, 1.0),
        Mat::from_row_slice(1, 4, &[1.0, 1.0, 0.0, 0.0]),
        Mat::from_row_slice(4, 1, &[0.0, 0.0, 1.0, 1.0]),
        Mat::zeros(4, 4),
        IndexSet::uniform(4, 1),
        IndexSet::uniform(4, 1),
        None,
    )
    .expect("consistent dimensions")
}

/// `[[1/(s+1), 0], [1/(s-1), 1/(s+1)]]` over `S1`, realized with states
/// `(-1, 1, -1)`. `split` assigns the first `split[0]` states to node 1.
pub fn coupled_ss(split: [usize; 2]) -> StateSpaceSystem {
    StateSpaceSystem::partitioned(
        diag(&[-1.0, 1.0, -1.0]),
        Mat::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
        Mat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
        Mat::zeros(2, 2),
        IndexSet::uniform(2, 1),
        IndexSet::uniform(2, 1),
        Some(IndexSet::new(split.to_vec())),
    )
    .expect("consistent dimensions")
}
