use thiserror::Error;

use crate::net::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("a network needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node {0} has a non-finite coordinate")]
    NonFiniteCoordinate(NodeId),
    #[error("{name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("nodes {0} and {1} share the same coordinates")]
    CoincidentNodes(NodeId, NodeId),
    #[error("node {0} is not part of the network")]
    UnknownNode(NodeId),
    #[error("distance between node {0} and itself is undefined")]
    SameNode(NodeId),
    #[error("expected {expected} power values, got {got}")]
    PowerVectorLength { expected: usize, got: usize },
    #[error("power {power} of node {node} is outside [0, {cap}]")]
    PowerOutOfRange { node: NodeId, power: f64, cap: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QosError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("ledger covers {got} nodes, network has {expected}")]
    LedgerSize { expected: usize, got: usize },
    #[error("threshold must be finite and non-negative, got {0}")]
    InvalidThreshold(f64),
    #[error("solver rejected the model: {0}")]
    Model(#[from] milp::ModelError),
    #[error("some request has no path in the full-power network graph")]
    Disconnected,
    #[error("solver hit its node or iteration limit")]
    ResourceLimit,
    #[error("decoded solution failed validation: {0}")]
    Inconsistent(#[from] ValidationError),
}

/// A decoded solver answer that does not satisfy the formulation. Always a bug
/// signal, never a routing outcome.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("solution status is not optimal")]
    NotOptimal,
    #[error("link ({0},{1}) is not symmetric")]
    Asymmetric(NodeId, NodeId),
    #[error("node {node} reaches {far} but not the closer node {near}")]
    DistanceOrder { node: NodeId, far: NodeId, near: NodeId },
    #[error("link ({0},{1}) needs more energy than E_max")]
    EnergyAboveMax(NodeId, NodeId),
    #[error("E_max {0} exceeds the power cap {1}")]
    AbovePowerCap(f64, f64),
    #[error("route of request {request} is broken: {reason}")]
    BrokenRoute { request: usize, reason: String },
    #[error("route of request {request} uses {hops} hops, bound is {bound}")]
    HopBound { request: usize, hops: usize, bound: usize },
    #[error("route of request {request} uses inactive link ({from},{to})")]
    InactiveLink { request: usize, from: NodeId, to: NodeId },
    #[error("node {node} carries {load} demand units, bandwidth is {bandwidth}")]
    Bandwidth { node: NodeId, load: f64, bandwidth: f64 },
    #[error("node {node} ends at {energy}, above average {average} + threshold {threshold}")]
    Threshold {
        node: NodeId,
        energy: f64,
        average: f64,
        threshold: f64,
    },
    /// The threshold row only held because of route arcs that are not on the
    /// simple source-destination path. Carries the node sets of those cycles.
    #[error("request {request} relies on detached cycles to satisfy the threshold rows")]
    SubtourDependent {
        request: usize,
        cycles: Vec<Vec<NodeId>>,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Qos(#[from] QosError),
}
