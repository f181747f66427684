use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("bisection workflows need an even vertex count, got n = {0}")]
    OddVertexCount(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("not a bisection vector: {0}")]
    NotBisection(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("attempt budget exhausted after {0} attempts")]
    AttemptsExhausted(usize),
    #[error("invalid move #{index}: {reason}")]
    InvalidMove { index: usize, reason: String },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("eigensolver did not converge after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("eigenspace too large: multiplicity {k} exceeds cap {cap}")]
    EigenspaceTooLarge { k: usize, cap: usize },
    #[error("degenerate echelon form: rank {rank} < {k}")]
    DegenerateEchelon { rank: usize, k: usize },
    #[error("witness conditions violated: {0}")]
    WitnessCondition(String),
    #[error("certificate check failed: {0}")]
    Certificate(String),
    #[error("graph too large for exhaustive search: n = {n} exceeds {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
