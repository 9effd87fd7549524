use thiserror::Error;

use crate::graph::{NodeId, Port};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge {index}: node {node} out of range (n = {n})")]
    NodeOutOfRange { index: usize, node: NodeId, n: usize },
    #[error("edge {index}: self-loop at node {node}")]
    SelfLoop { index: usize, node: NodeId },
    #[error("edge {index}: duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { index: usize, u: NodeId, v: NodeId },
    #[error("edge {index}: port {port} used twice at node {node}")]
    DuplicatePort { index: usize, node: NodeId, port: Port },
    #[error("node {node}: ports are not exactly 0..{degree}")]
    PortGap { node: NodeId, degree: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("port {port} out of range at node {node} (degree {degree})")]
    PortOutOfRange { node: NodeId, port: Port, degree: usize },
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("approach nodes are at distance greater than 2")]
    TooFar,
    #[error("approach graph is symmetric; no leader can be elected from it")]
    Symmetric,
    #[error("nodes must be distinct")]
    SameNode,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplorationError {
    #[error("degree 0 has no ports")]
    ZeroDegree,
    #[error("entry port {port} out of range for degree {degree}")]
    EntryPortOutOfRange { port: Port, degree: usize },
    #[error("scale exceeded: {instances} instances exceed the budget of {budget}")]
    ScaleExceeded { instances: u64, budget: u64 },
    #[error("search budget exhausted after {length} terms without certification")]
    BudgetExhausted { length: usize },
    #[error("size bound must be at least 2 (got {0})")]
    BoundTooSmall(usize),
    #[error("size bound {0} is beyond the supported scale (max 8)")]
    BoundTooLarge(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A state or observation that the protocol automaton cannot explain.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("protocol violation at local round {local_round}: {message}")]
pub struct ProtocolError {
    pub local_round: u64,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("start nodes must be distinct")]
    SameStart,
    #[error("start node {0} is not in the graph")]
    StartOutOfRange(NodeId),
    #[error("graph has {nodes} nodes but the sequence is certified only up to {certified}")]
    SequenceTooWeak { nodes: usize, certified: usize },
    #[error("protocol runs need at least 3 nodes")]
    TooSmall,
    #[error("trace has not terminated for both agents")]
    NotTerminated,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
