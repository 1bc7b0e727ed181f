//! JSON formats for graphs and systems.
//!
//! Graph: `{"nodes": N, "edges": [[i, j], ...]}` with 1-based labels; an
//! edge `[i, j]` means `i -> j`. Self-loops may be omitted and are added on
//! load.
//!
//! System: `{"kind": "ss", "A": [[..]], "B": .., "C": .., "D": .., "k": [..],
//! "m": [..], "n": [..]}` with row-major matrices and an optional `n`, or
//! `{"kind": "tf", "entries": [{"row": i, "col": j, "num": [..], "den":
//! [..]}], "k": [..], "m": [..]}` with 1-based scalar `row`/`col` and
//! coefficients listed highest degree first.

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numerics::Mat;
use crate::realize::StructuredRealization;
use crate::serde_util::rows;
use crate::system::{tf_to_ss, IndexSet, StateSpaceSystem, TfEntry, TransferSpec};

fn json_error(e: serde_json::Error) -> Error {
    Error::Input(format!("malformed JSON: {e}"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    nodes: usize,
    edges: Vec<[usize; 2]>,
}

/// Parses a graph file. Labels are checked against the node count; the
/// graph assumptions themselves are not enforced here.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let file: GraphFile = serde_json::from_str(text).map_err(json_error)?;
    let mut edges = Vec::with_capacity(file.edges.len());
    for (pos, &[i, j]) in file.edges.iter().enumerate() {
        if i == 0 || j == 0 || i > file.nodes || j > file.nodes {
            return Err(Error::Input(format!(
                "edge #{} [{i}, {j}] is outside nodes 1..{}",
                pos + 1,
                file.nodes
            )));
        }
        edges.push((i - 1, j - 1));
    }
    Graph::with_self_loops(file.nodes, edges)
}

pub fn graph_to_json(g: &Graph) -> serde_json::Value {
    let edges: Vec<[usize; 2]> = g.edges().map(|(i, j)| [i + 1, j + 1]).collect();
    serde_json::json!({ "nodes": g.n_nodes(), "edges": edges })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    row: usize,
    col: usize,
    num: Vec<f64>,
    den: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum SystemFile {
    Ss {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
        #[serde(rename = "D")]
        d: Vec<Vec<f64>>,
        k: Vec<usize>,
        m: Vec<usize>,
        #[serde(default)]
        n: Option<Vec<usize>>,
    },
    Tf {
        entries: Vec<EntryFile>,
        k: Vec<usize>,
        m: Vec<usize>,
    },
}

/// A system as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemInput {
    StateSpace(StateSpaceSystem),
    Transfer(TransferSpec),
}

impl SystemInput {
    /// The state-space form; transfer specs are realized column by column.
    pub fn to_state_space(&self) -> Result<StateSpaceSystem> {
        match self {
            SystemInput::StateSpace(s) => Ok(s.clone()),
            SystemInput::Transfer(t) => tf_to_ss(t),
        }
    }
}

fn matrix_from_rows(data: &[Vec<f64>], r: usize, c: usize, name: &str) -> Result<Mat> {
    if data.is_empty() && (r == 0 || c == 0) {
        return Ok(Mat::zeros(r, c));
    }
    if data.len() != r || data.iter().any(|row| row.len() != c) {
        return Err(Error::Dimension(format!("{name} must be {r}x{c}")));
    }
    Ok(Mat::from_fn(r, c, |i, j| data[i][j]))
}

pub fn parse_system(text: &str) -> Result<SystemInput> {
    let file: SystemFile = serde_json::from_str(text).map_err(json_error)?;
    match file {
        SystemFile::Ss { a, b, c, d, k, m, n } => {
            let (k, m) = (IndexSet::new(k), IndexSet::new(m));
            let nx = a.len();
            let sys = StateSpaceSystem::partitioned(
                matrix_from_rows(&a, nx, nx, "A")?,
                matrix_from_rows(&b, nx, m.total(), "B")?,
                matrix_from_rows(&c, k.total(), nx, "C")?,
                matrix_from_rows(&d, k.total(), m.total(), "D")?,
                k,
                m,
                n.map(IndexSet::new),
            )?;
            Ok(SystemInput::StateSpace(sys))
        }
        SystemFile::Tf { entries, k, m } => {
            let mut out = Vec::with_capacity(entries.len());
            for e in entries {
                if e.row == 0 || e.col == 0 {
                    return Err(Error::Input("transfer entries use 1-based row and col".into()));
                }
                out.push(TfEntry {
                    row: e.row - 1,
                    col: e.col - 1,
                    num: e.num,
                    den: e.den,
                });
            }
            Ok(SystemInput::Transfer(TransferSpec::new(
                IndexSet::new(k),
                IndexSet::new(m),
                out,
            )?))
        }
    }
}

impl Serialize for StateSpaceSystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("kind", "ss")?;
        map.serialize_entry("A", &rows(self.a()))?;
        map.serialize_entry("B", &rows(self.b()))?;
        map.serialize_entry("C", &rows(self.c()))?;
        map.serialize_entry("D", &rows(self.d()))?;
        map.serialize_entry("k", self.outputs().dims())?;
        map.serialize_entry("m", self.inputs().dims())?;
        if let Some(n) = self.states() {
            map.serialize_entry("n", n.dims())?;
        }
        map.end()
    }
}

impl Serialize for TransferSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<serde_json::Value> = self
            .entries()
            .iter()
            .map(|e| serde_json::json!({"row": e.row + 1, "col": e.col + 1, "num": e.num, "den": e.den}))
            .collect();
        let mut map = s.serialize_map(Some(4))?;
        map.serialize_entry("kind", "tf")?;
        map.serialize_entry("entries", &entries)?;
        map.serialize_entry("k", self.outputs().dims())?;
        map.serialize_entry("m", self.inputs().dims())?;
        map.end()
    }
}

impl Serialize for StructuredRealization {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("system", self.sys())?;
        map.serialize_entry("report", self.report())?;
        map.end()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize infallibly")
}
