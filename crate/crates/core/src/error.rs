use thiserror::Error;

/// Errors raised by grid construction, assembly and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coincident stencil nodes at index {0}")]
    CoincidentNodes(usize),

    #[error("matrix is numerically singular (pivot {pivot:e} at row {row})")]
    Singular { row: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no penalty region: indicator has no active nodes")]
    NoPenaltyRegion,

    #[error("indicator is not a single left block (first gap at node {0})")]
    NonMonotoneIndicator(usize),

    #[error("need nodes up to index {needed} right of the front, grid ends at {available}")]
    InsufficientNodes { needed: usize, available: usize },

    #[error("front {front} lies outside [{lo}, {hi})")]
    FrontOutsideInterval { front: f64, lo: f64, hi: f64 },

    #[error("root bracket failed: {0}")]
    Bracket(String),

    #[error("startup produced non-finite values at step {0}; try smaller first steps or the square time transform")]
    StartupUnstable(usize),

    #[error("inconsistent obstacle derivative of order {order} at S = {at}")]
    InconsistentObstacle { order: usize, at: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
