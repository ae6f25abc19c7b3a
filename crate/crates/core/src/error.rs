use thiserror::Error;

/// Errors raised by the laboratory's constructions and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point outside the open unit disc: |z| = {0}")]
    NotInterior(f64),

    #[error("zero covector")]
    ZeroCovector,

    #[error("pole at {0}")]
    Pole(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("aliasing budget exceeded: tail {tail:.3e} > {budget:.3e}")]
    Aliasing { tail: f64, budget: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("unknown face label: {0}")]
    UnknownFace(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
