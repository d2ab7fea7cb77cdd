//! Design-versus-realisation checks: expected computation graph, graph diff,
//! subsystem and system verification, and source placement.

mod diff;
mod graph;
mod policy;
mod verify;

pub use diff::{diff_graphs, edge_subject};
pub use graph::{expected_graph, Edge, ExpectedGraph};
pub use policy::{MatchPolicy, INFRASTRUCTURE_CHANNELS};
pub use verify::{verify_sources, verify_subsystem, verify_subsystems, verify_system, Conformance};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConformanceError {
    #[error("scope `{0}` is not a system of the model")]
    UnknownScope(String),
}
