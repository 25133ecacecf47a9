use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("integration failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("chart switch required: {0}")]
    ChartSwitch(String),

    #[error("truncation: tail mass {tail:.3e} exceeds {limit:.1e}; {hint}")]
    Truncation { tail: f64, limit: f64, hint: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
