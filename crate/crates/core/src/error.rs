use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function (e.g. `r < 1` for φ).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    /// Constraints of a least-norm extension cannot be met.
    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("ill-conditioned solve: {detail} (estimated condition number {condition:.3e})")]
    Conditioning { detail: String, condition: f64 },

    /// Parameter combinations excluded by the underlying theory.
    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    /// A symbol violates its structural invariants.
    #[error("structural error in symbol: {0}")]
    Structural(String),

    #[error("degenerate boundary frame: {0}")]
    DegenerateFrame(String),

    #[error("root split is unbalanced: {plus} roots with Im > 0, {minus} with Im < 0 (expected {expected} each)")]
    UnbalancedSplit {
        plus: usize,
        minus: usize,
        expected: usize,
    },

    #[error("unstable mode {xi:?}: Re lambda = {re_lambda:.6e}")]
    Stability { xi: Vec<f64>, re_lambda: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
