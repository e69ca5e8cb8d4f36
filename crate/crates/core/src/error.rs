use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("singular matrix (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("outside model domain: {0}")]
    DomainError(String),

    #[error("degenerate velocity gradient: |det sym(Q0 F0^-1)| = {det:e}")]
    DegenerateQ { det: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("boundary values violate clamping by {deviation:e} at node {node}")]
    BoundaryMismatch { node: usize, deviation: f64 },

    #[error("interpenetration: det = {det:e} at cell {cell} is below the floor {floor:e}")]
    Interpenetration { cell: usize, det: f64, floor: f64 },

    #[error("det ∇ξ fell below the floor at t = {time}")]
    Breakdown { time: f64 },

    #[error("Picard iteration diverged at t = {time}")]
    PicardDivergence { time: f64 },

    #[error("linear solver failed at t = {time}: {reason}")]
    LinearSolveFailure { time: f64, reason: String },

    #[error("mismatched time sampling: {0}")]
    MismatchedSampling(String),

    #[error("at node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("value of `{key}` out of range: {message}")]
    Range { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
