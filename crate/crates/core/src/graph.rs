//! Directed information-flow graphs.
//!
//! Nodes are indexed `0..n` internally; JSON and human-readable reports use
//! 1-based labels. An edge `(i, j)` means node `i` influences node `j`, which
//! permits a nonzero `(j, i)` block in every structured matrix.
//!
//! A graph is usable for structured analysis when it has every self-loop,
//! is transitively closed, and has no directed cycle through two or more
//! nodes. Graphs violating these are rejected, never repaired implicitly;
//! [`transitive_closure`] and [`condense`] are the explicit repairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_nodes: usize,
    edges: BTreeSet<(usize, usize)>,
}

/// A failed graph assumption together with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphViolation {
    MissingSelfLoop { node: usize },
    /// `from -> via -> to` is present but `from -> to` is not.
    MissingTransitiveEdge { from: usize, via: usize, to: usize },
    /// Nodes of a strongly connected component with at least two members.
    Cycle { nodes: Vec<usize> },
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphViolation::MissingSelfLoop { node } => {
                write!(f, "missing self-loop at node {}", node + 1)
            }
            GraphViolation::MissingTransitiveEdge { from, via, to } => write!(
                f,
                "missing transitive edge {} -> {} (via {})",
                from + 1,
                to + 1,
                via + 1
            ),
            GraphViolation::Cycle { nodes } => {
                let labels: Vec<String> = nodes.iter().map(|n| (n + 1).to_string()).collect();
                write!(f, "directed cycle through nodes [{}]", labels.join(", "))
            }
        }
    }
}

impl Graph {
    /// Builds a graph from 0-based edges. Self-loops are not added.
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::Input("a graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= n_nodes || j >= n_nodes {
                return Err(Error::Input(format!(
                    "edge ({}, {}) out of range for {} nodes",
                    i + 1,
                    j + 1,
                    n_nodes
                )));
            }
            set.insert((i, j));
        }
        Ok(Graph { n_nodes, edges: set })
    }

    /// Same as [`Graph::new`], then adds every missing self-loop.
    pub fn with_self_loops(
        n_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut g = Graph::new(n_nodes, edges)?;
        g.edges.extend((0..n_nodes).map(|i| (i, i)));
        Ok(g)
    }

    /// The totally ordered chain `0 -> 1 -> ... -> n-1`, transitively closed.
    pub fn chain(n_nodes: usize) -> Result<Self> {
        Graph::new(
            n_nodes,
            (0..n_nodes).flat_map(|j| (j..n_nodes).map(move |i| (j, i))),
        )
    }

    /// Self-loops only.
    pub fn isolated(n_nodes: usize) -> Result<Self> {
        Graph::new(n_nodes, (0..n_nodes).map(|i| (i, i)))
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    fn digraph(&self, skip_self_loops: bool) -> DiGraphMap<usize, ()> {
        let mut g = DiGraphMap::new();
        for i in 0..self.n_nodes {
            g.add_node(i);
        }
        for &(i, j) in &self.edges {
            if !(skip_self_loops && i == j) {
                g.add_edge(i, j, ());
            }
        }
        g
    }
}

/// Checks self-loops, transitive closure and acyclicity. An empty result
/// means the graph is valid.
pub fn validate_graph(g: &Graph) -> Vec<GraphViolation> {
    let n = g.n_nodes;
    let mut out = Vec::new();
    for i in 0..n {
        if !g.has_edge(i, i) {
            out.push(GraphViolation::MissingSelfLoop { node: i });
        }
    }
    for &(a, b) in &g.edges {
        if a == b {
            continue;
        }
        for c in 0..n {
            if b != c && g.has_edge(b, c) && !g.has_edge(a, c) {
                out.push(GraphViolation::MissingTransitiveEdge {
                    from: a,
                    via: b,
                    to: c,
                });
            }
        }
    }
    let mut cycles: Vec<Vec<usize>> = tarjan_scc(&g.digraph(true))
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    cycles.sort();
    out.extend(cycles.into_iter().map(|nodes| GraphViolation::Cycle { nodes }));
    out
}

fn ensure_valid(g: &Graph) -> Result<()> {
    let v = validate_graph(g);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Graph(v))
    }
}

/// A relabeling of nodes. `order[p]` is the original node placed at
/// position `p`; `inverse[node]` is the position of an original node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeOrdering {
    order: Vec<usize>,
    inverse: Vec<usize>,
}

impl NodeOrdering {
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut inverse = vec![usize::MAX; n];
        for (p, &node) in order.iter().enumerate() {
            if node >= n || inverse[node] != usize::MAX {
                return Err(Error::Input(format!("{order:?} is not a permutation")));
            }
            inverse[node] = p;
        }
        Ok(NodeOrdering { order, inverse })
    }

    pub fn identity(n: usize) -> Self {
        NodeOrdering {
            order: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.order.iter().enumerate().all(|(p, &n)| p == n)
    }

    /// Relabels a graph so that original node `order[p]` becomes node `p`.
    pub fn relabel(&self, g: &Graph) -> Graph {
        Graph {
            n_nodes: g.n_nodes,
            edges: g
                .edges
                .iter()
                .map(|&(i, j)| (self.inverse[i], self.inverse[j]))
                .collect(),
        }
    }
}

/// Lexicographically smallest topological order (Kahn's algorithm with a
/// min-ordered ready set).
pub fn topological_order(g: &Graph) -> Result<NodeOrdering> {
    ensure_valid(g)?;
    let n = g.n_nodes;
    let mut indeg = vec![0usize; n];
    for (i, j) in g.edges() {
        if i != j {
            indeg[j] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(next) = ready.pop_first() {
        order.push(next);
        for j in 0..n {
            if j != next && g.has_edge(next, j) {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.insert(j);
                }
            }
        }
    }
    debug_assert_eq!(order.len(), n);
    NodeOrdering::from_order(order)
}

/// Boolean block-sparsity mask: `allows(i, j)` iff `j -> i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    mask: Vec<bool>,
}

impl SparsityPattern {
    /// Validates the mask as the adjacency matrix of a valid graph.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("sparsity mask must be square".into()));
        }
        let edges = (0..n).flat_map(|i| (0..n).filter(move |&j| rows[i][j]).map(move |j| (j, i)));
        let g = Graph::new(n, edges)?;
        adjacency(&g)
    }

    /// Full lower-triangular pattern of a chain.
    pub fn lower_triangular(n: usize) -> Self {
        let mut mask = vec![false; n * n];
        for i in 0..n {
            for j in 0..=i {
                mask[i * n + j] = true;
            }
        }
        SparsityPattern { n, mask }
    }

    /// Diagonal pattern (no communication between nodes).
    pub fn diagonal(n: usize) -> Self {
        let mut mask = vec![false; n * n];
        for i in 0..n {
            mask[i * n + i] = true;
        }
        SparsityPattern { n, mask }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn allows(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.n + col]
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.allows(i, j)).collect())
            .collect()
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| !self.allows(i, j)))
    }

    /// The graph this mask is the adjacency matrix of.
    pub fn to_graph(&self) -> Graph {
        let edges = (0..self.n)
            .flat_map(|i| (0..self.n).filter(move |&j| self.allows(i, j)).map(move |j| (j, i)))
            .collect();
        Graph {
            n_nodes: self.n,
            edges,
        }
    }

    /// The pattern with nodes relabeled by `ord`.
    pub fn permuted(&self, ord: &NodeOrdering) -> SparsityPattern {
        let n = self.n;
        let mut mask = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                mask[i * n + j] = self.allows(ord.order[i], ord.order[j]);
            }
        }
        SparsityPattern { n, mask }
    }

    /// True if every block allowed here is allowed by `other`.
    pub fn is_subpattern_of(&self, other: &SparsityPattern) -> bool {
        self.n == other.n && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }
}

/// Adjacency mask of a valid graph.
pub fn adjacency(g: &Graph) -> Result<SparsityPattern> {
    ensure_valid(g)?;
    let n = g.n_nodes;
    let mut mask = vec![false; n * n];
    for (j, i) in g.edges() {
        mask[i * n + j] = true;
    }
    Ok(SparsityPattern { n, mask })
}

/// Adds every edge implied by transitivity (Warshall).
pub fn transitive_closure(g: &Graph) -> Graph {
    let n = g.n_nodes;
    let mut reach = vec![false; n * n];
    for (i, j) in g.edges() {
        reach[i * n + j] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i * n + k] {
                for j in 0..n {
                    if reach[k * n + j] {
                        reach[i * n + j] = true;
                    }
                }
            }
        }
    }
    let edges = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| reach[i * n + j])
        .collect();
    Graph { n_nodes: n, edges }
}

/// Merges every strongly connected component into a single node.
///
/// Returns the merged graph and `mapping[old] = new`. New nodes are numbered
/// by the smallest original member of each component. Self-loops are kept
/// for every merged node that had one; closure is not applied.
pub fn condense(g: &Graph) -> (Graph, Vec<usize>) {
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g.digraph(false))
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    comps.sort_by_key(|c| c[0]);
    let mut mapping = vec![0; g.n_nodes];
    for (new, comp) in comps.iter().enumerate() {
        for &old in comp {
            mapping[old] = new;
        }
    }
    let mut has_loop: BTreeMap<usize, bool> = BTreeMap::new();
    let mut edges = BTreeSet::new();
    for (i, j) in g.edges() {
        let (a, b) = (mapping[i], mapping[j]);
        if a == b {
            if i == j {
                has_loop.insert(a, true);
            }
            // internal cycle edges collapse onto the merged node
            if comps[a].len() > 1 {
                edges.insert((a, a));
            }
        } else {
            edges.insert((a, b));
        }
    }
    for (a, _) in has_loop {
        edges.insert((a, a));
    }
    (
        Graph {
            n_nodes: comps.len(),
            edges,
        },
        mapping,
    )
}
