use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("map spec parse error: {0}")]
    Parse(String),

    #[error("orbit escaped to infinity")]
    Escaped,

    #[error("root finder did not converge (max residual {max_residual:.3e})")]
    RootsNotConverged { max_residual: f64, residuals: Vec<f64> },

    #[error("ambiguous inverse branch at path parameter {parameter:.6} (segment {segment})")]
    AmbiguousBranch { segment: usize, parameter: f64 },

    #[error("lift precondition failed: {0}")]
    LiftStart(String),

    #[error("lifted legs collide: {0}")]
    LegCollision(String),

    #[error("invalid Y-tree: {0}")]
    InvalidYTree(String),

    #[error("invalid continuum: {0}")]
    InvalidContinuum(String),

    #[error("empty set: {0}")]
    Empty(String),

    #[error("resolution-limited: {0}")]
    ResolutionLimited(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("endpoint preimage pattern mismatch: {0}")]
    PatternMismatch(String),

    #[error("partition is not Markov: {0}")]
    NotMarkov(String),

    #[error("power iteration did not converge after {0} iterations")]
    NotConverged(usize),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("cover fault: {0}")]
    Cover(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
