use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),
    #[error("{0} is not a prime modulus")]
    NotPrime(u64),
    #[error("group order exceeds bound {bound}")]
    GroupTooLarge { bound: usize },
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("incompatible operands: {0}")]
    IncompatibleOperands(String),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionError { expected: usize, got: usize },
    #[error("vector is not in the span of the basis")]
    NotInSpan,
    #[error("linear system has no solution")]
    NoSolution,
    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),
    #[error("parameters rejected: {0}")]
    ParameterRejection(String),
    #[error("sampler failure: {0}")]
    SamplerFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
