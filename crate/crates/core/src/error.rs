use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid function has {got} values, grid has {expected} nodes")]
    ValueCount { expected: usize, got: usize },

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("ball resolves to no nodes")]
    EmptyBall,

    #[error("ball exits domain")]
    BallExitsDomain,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("cannot parse operator spec: offending token `{0}`")]
    OperatorSpec(String),

    #[error("stencil exits domain")]
    StencilExitsDomain,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("relaxation did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("obstacle relaxation did not converge after {iterations} iterations (last residual {residual:e}, {contact_nodes} contact nodes)")]
    ObstacleNotConverged {
        iterations: usize,
        residual: f64,
        contact_nodes: usize,
    },

    #[error("invalid obstacle problem: {0}")]
    InvalidObstacle(String),

    #[error("empty touching dictionary")]
    EmptyDictionary,

    #[error("region has fewer than 2 nodes")]
    RegionTooSmall,

    #[error("affine fit underdetermined")]
    AffineFitUnderdetermined,

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("fewer than 3 usable levels")]
    TooFewLevels,

    #[error("oscillation {0} on the unit ball is not below 1")]
    OscillationTooLarge(f64),

    #[error("center net is empty")]
    EmptyNet,

    #[error("kernel under-resolved")]
    KernelUnderResolved,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("lower bound exceeds upper bound at node {0}")]
    BoundsOrder(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
