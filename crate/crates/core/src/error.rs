use thiserror::Error;

/// Errors raised by the geometry, group and measure layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    /// Malformed or non-convex domain, or a point that is not where it must be.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs that violate an operation's preconditions.
    #[error("argument error: {0}")]
    Argument(String),
    /// A point that cannot be represented in the requested affine chart.
    #[error("chart error: {0}")]
    Chart(String),
    /// A numerical routine that failed to converge or lost too much precision.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// An enumeration or sampling budget was exhausted.
    #[error("resource error: {0}")]
    Resource(String),
    /// The group is virtually cyclic or otherwise too small for the request.
    #[error("elementary group: {0}")]
    ElementaryGroup(String),
    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, HilbertError>;

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(HilbertError::Domain(msg.into()))
}

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(HilbertError::Argument(msg.into()))
}

pub(crate) fn num_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(HilbertError::Numerical(msg.into()))
}
