use thiserror::Error;

use crate::geodesic::SpaceKind;

pub type Result<T, E = GossipError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GossipError {
    /// The pair (or triple) of points has no unique geodesic, or an argument
    /// lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tag mismatch: expected {expected} point, got {found}")]
    TagMismatch { expected: SpaceKind, found: SpaceKind },

    #[error("tag mismatch: model points with curvature {expected} and {found}")]
    KappaMismatch { expected: f64, found: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("infeasible comparison triangle: {0}")]
    InfeasibleTriangle(String),

    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },

    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge { u: usize, v: usize, reason: String },

    #[error("operation `{op}` is not supported on the {space} space")]
    UnsupportedSpace { op: &'static str, space: SpaceKind },

    #[error("initialization failed: {0}")]
    Initialization(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    /// A runtime failure inside a trial, located by trial and iteration.
    #[error("trial {trial}, iteration {iter}: {source}")]
    Trial { trial: usize, iter: u64, source: Box<GossipError> },
}

impl GossipError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GossipError::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        GossipError::Numerical(msg.into())
    }
}
