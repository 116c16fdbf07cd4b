use std::fmt;

/// Crate-wide error type. Variants carry the offending parameter so callers
/// (and the CLI) can report actionable messages and map to exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates a documented precondition.
    Precondition { param: &'static str, msg: String },
    /// An enumeration or search exceeded its configured budget. `lower_bound`
    /// is the count found before giving up, which remains a valid lower bound.
    Budget { budget: u64, lower_bound: u64 },
    /// Mismatched dimensions between two arguments.
    Dimension { expected: usize, got: usize },
    /// A body, lattice or surface is degenerate (zero volume, singular basis,
    /// empty partition, …).
    Degenerate(String),
    /// A requested target is not reachable within the allowed perturbation
    /// amplitude.
    OutOfReach { cap: usize, needed: f64, allowed: f64 },
    /// A numerical certification check failed.
    Certification(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Precondition { param, msg } => {
                write!(f, "precondition violated for `{param}`: {msg}")
            }
            Error::Budget { budget, lower_bound } => write!(
                f,
                "budget of {budget} exceeded (count so far {lower_bound}, a valid lower bound)"
            ),
            Error::Dimension { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::OutOfReach { cap, needed, allowed } => write!(
                f,
                "cap {cap}: required amplitude {needed:.3e} exceeds allowed {allowed:.3e}"
            ),
            Error::Certification(msg) => write!(f, "certification failed: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Shorthand for `Error::Precondition` with a formatted message.
pub fn precondition(param: &'static str, msg: impl fmt::Display) -> Error {
    Error::Precondition { param, msg: msg.to_string() }
}
