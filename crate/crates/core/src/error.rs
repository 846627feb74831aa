use thiserror::Error;

/// Errors raised by the library.
///
/// The variants mirror the failure classes the command-line harness maps to
/// exit codes: domain errors (e.g. a subcritical offspring law), resource
/// caps, and malformed input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid word: symbol {symbol} at position {position} is outside the alphabet of size {alphabet}")]
    InvalidWord {
        symbol: usize,
        position: usize,
        alphabet: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource cap exceeded: {what} would need more than {cap} entries")]
    Resource { what: &'static str, cap: usize },

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("horizon error: tree of horizon {horizon} does not reach the requested section (scale {scale:e})")]
    Horizon { horizon: usize, scale: f64 },

    #[error("sampling error: no surviving tree after {attempts} attempts")]
    Sampling { attempts: u64 },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
