//! Crate-wide error type.

use std::fmt;

/// Errors produced by samplers, mechanisms, estimators, and the runner.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two bit vectors (or a vector and a matrix) disagree on dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// An operation that needs at least one row was given an empty dataset.
    EmptyDataset,
    /// A parameter is outside its documented domain.
    InvalidParameter(String),
    /// A (mechanism, attacker, side-info, definition) combination that the
    /// game wiring does not support. Raised before any trial runs.
    IncompatibleSpec(String),
    /// The exact enumeration oracle was asked for a state space it cannot
    /// afford to walk.
    SizeBoundExceeded(String),
    /// Configuration text could not be parsed.
    Config(String),
    /// Unknown scenario name.
    UnknownScenario(String),
    /// Filesystem failure while emitting outputs.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::EmptyDataset => write!(f, "operation requires a nonempty dataset"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::IncompatibleSpec(msg) => write!(f, "incompatible game spec: {msg}"),
            Error::SizeBoundExceeded(msg) => write!(f, "enumeration size bound exceeded: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::UnknownScenario(name) => write!(f, "unknown scenario: {name}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
