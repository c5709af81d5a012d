//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by numerical routines.
///
/// Contract violations on plain evaluation paths (non-finite arguments,
/// dimension mismatches) panic instead; these variants cover conditions a
/// caller can meaningfully react to.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or data supplied to a constructor or parser.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative process exhausted its budget. Carries the best value
    /// reached so diagnostics survive the failure.
    #[error("{what} did not converge after {iterations} iterations (best: {best:.6e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        best: f64,
    },

    /// An operation that requires a nonzero field received an identically
    /// zero one.
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    /// A stated precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A sampled invariant of an N-function failed.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// A least-squares certificate was too poorly conditioned to trust.
    #[error("inconclusive fit: {what} (r^2 = {r_squared:.4})")]
    InconclusiveFit { what: &'static str, r_squared: f64 },

    /// Root bracketing failed after the allowed number of expansions.
    #[error("no sign change found for {what} after {expansions} bracket expansions")]
    BracketFailure {
        what: &'static str,
        expansions: usize,
    },

    /// Line search could not find a decreasing step.
    #[error("line search stalled after {backtracks} backtracks")]
    LineSearchStall { backtracks: usize },

    /// Configuration file problems, with the offending line when known.
    #[error("config error{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { msg: String, line: Option<usize> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>, line: Option<usize>) -> Self {
        Error::Config {
            msg: msg.into(),
            line,
        }
    }
}
