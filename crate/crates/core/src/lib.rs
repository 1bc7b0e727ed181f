//! Structured realizability and stabilizability analysis for linear
//! time-invariant systems whose inputs, outputs and states are distributed
//! over the nodes of a directed acyclic graph.
//!
//! Systems are always carried as state-space data ([`StateSpaceSystem`]);
//! rational transfer matrices enter only through [`TransferSpec`]. Node
//! labels are 0-based in the API and 1-based in JSON and error messages.

pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod numerics;
pub mod random;
pub mod realize;
mod serde_util;
pub mod stability;
pub mod synthesis;
pub mod system;

pub use error::{Error, Result};
pub use graph::{Graph, NodeOrdering, SparsityPattern};
pub use numerics::{Mat, Tolerances};
pub use realize::{RealizationReport, StructuredRealization};
pub use stability::{ClosedLoopReport, Verdict};
pub use synthesis::{GainSchedule, SynthesisReport};
pub use system::{IndexSet, StateSpaceSystem, StructuredPattern, TransferSpec};
