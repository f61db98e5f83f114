use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A model or preset parameter violates one of its admissibility constraints.
    #[error("constraint violated: {constraint} (got {value})")]
    ConstraintViolation { constraint: &'static str, value: f64 },

    #[error("theta = {theta} is on the boundary {{0, 1}}; use f0/f1 instead")]
    ThetaBoundary { theta: f64 },

    #[error("argument {value} outside the domain {domain}")]
    Domain { domain: &'static str, value: f64 },

    #[error("could not bracket the root of f (theta = {theta}); this indicates invalid parameters")]
    NoBracket { theta: f64 },

    #[error("{0}")]
    NotApplicable(String),

    #[error("ODE integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("population parameter n = {n} exceeds the oracle limit {max}")]
    TooLarge { n: u64, max: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
