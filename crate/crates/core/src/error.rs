use std::path::PathBuf;

use thiserror::Error;

use crate::distributions::ModelKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("gamma density is singular at v = 0 for shape {shape} < 1")]
    SingularDensity { shape: f64 },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("sample {index} is {value}, samples must be positive and finite")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("gamma shape Newton iteration did not converge after {iterations} steps (last shape {last_shape})")]
    NonConvergence { iterations: usize, last_shape: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("initial fit of the {model} model on the whole trace failed: {reason}")]
    Setup { model: ModelKind, reason: Box<Error> },

    #[error("empty trace")]
    EmptyTrace,

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("wire format: {0}")]
    Wire(#[from] WireError),
}

/// Decoding and encoding failures for the regime announcement record.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WireError {
    #[error("buffer is {got} bytes, expected {expected}")]
    Length { expected: usize, got: usize },

    #[error("unknown version {0}")]
    UnknownVersion(u8),

    #[error("unknown model id {0}")]
    UnknownModel(u8),

    #[error("model {model} carries {expected} parameters, record declares {got}")]
    ParamCount { model: ModelKind, expected: usize, got: usize },

    #[error("parameter {index} is {value}, must be positive and finite")]
    BadParam { index: usize, value: f64 },

    #[error("window length must be at least 1")]
    EmptyWindow,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io { path: path.into(), message: err.to_string() }
    }
}
