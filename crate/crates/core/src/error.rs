use thiserror::Error;

use crate::laurent::LaurentError;

/// Errors raised by surfaces, networks and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid stepped surface: {0}")]
    InvalidSurface(String),
    #[error("site ({i},{j}) is not mutable: {reason}")]
    NotMutable { i: i64, j: i64, reason: String },
    #[error("point ({i},{j}) lies outside the window")]
    OutOfWindow { i: i64, j: i64 },
    #[error("point ({i},{j},{k}) lies below the surface")]
    BelowSurface { i: i64, j: i64, k: i64 },
    #[error("chip argument is not a unit: {0}")]
    NotUnit(String),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("ambiguous shadow corners: {0}")]
    CornerAmbiguity(String),
    #[error("non-Laurent value during recursion: {0}")]
    LaurentViolation(String),
    #[error("division by zero; regularization needed: {0}")]
    NeedsRegularization(String),
    #[error("method {method} does not apply: {reason}")]
    NotApplicable { method: String, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

pub type Result<T> = std::result::Result<T, Error>;
