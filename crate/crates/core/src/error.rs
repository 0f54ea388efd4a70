use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have dimension at least 1")]
    EmptyMatrix,

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: max |a_ij - a_ji| = {asymmetry:e} exceeds {allowed:e}")]
    NonSymmetric { asymmetry: f64, allowed: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("eigenvalues {eigenvalues:?} lie outside the domain ({lo}, {hi})")]
    DomainViolation { eigenvalues: Vec<f64>, lo: f64, hi: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),

    #[error("argument out of range: {0}")]
    ArgumentOutOfRange(String),

    #[error("weight {0} is outside [0, 1]")]
    InvalidWeight(f64),

    #[error("values are not sorted in non-increasing order")]
    NotSorted,

    #[error("exponent grid is empty")]
    EmptyGrid,

    #[error("interval ({lo}, {hi}) is empty")]
    EmptyDomain { lo: f64, hi: f64 },

    #[error("function {name} vanishes or changes sign near t = {at}")]
    ZeroDivision { name: String, at: f64 },

    #[error("invalid sampling interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },

    #[error("generator gave up after {attempts} attempts: {reason}")]
    GeneratorExhausted { attempts: usize, reason: String },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("matrices do not commute (commutator max-entry {0:e})")]
    NotCommuting(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("instance is missing field `{0}`")]
    MissingField(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
