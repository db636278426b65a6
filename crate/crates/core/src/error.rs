use thiserror::Error;

/// Errors raised by the geometry, mapping, solver, and engine layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("parameter {name} = {value} out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("antipodal or near-antipodal points (distance {0}): geodesic is not unique")]
    Antipodal(f64),

    #[error("perimeter {0} is not below 2*pi")]
    Perimeter(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("diagnostic undefined: {0}")]
    Undefined(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),

    #[error("non-finite state at step {step}: {what}")]
    NonFinite { step: usize, what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
