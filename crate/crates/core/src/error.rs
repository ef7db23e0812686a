use thiserror::Error;

/// Errors produced while building distributions, evaluating bounds, or
/// running scenarios.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("theta = {theta} is outside the domain of the {family} family")]
    Domain { family: String, theta: f64 },

    #[error("power series for {family} does not converge at theta = {theta}")]
    Convergence { family: String, theta: f64 },

    #[error("{family} has h'(theta) = 0, so its derived distribution is undefined")]
    Degenerate { family: String },

    #[error("could not certify a tail below {eps:e} within {limit} terms")]
    Truncation { eps: f64, limit: usize },

    #[error("a convolution needs at least one summand")]
    EmptySpec,

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("no closed form available: {0}")]
    UnsupportedClosedForm(String),

    #[error("convolution support of {len} entries exceeds the cap of {cap}")]
    SupportCap { len: usize, cap: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
