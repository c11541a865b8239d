use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter regime violated: {0}")]
    ParameterRegime(String),

    #[error("numerical failure at t = {t}: {msg}")]
    Numeric { t: f64, msg: String },

    #[error("diagnostic check failed at t = {t}: {msg}")]
    Diagnostic { t: f64, msg: String },

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("Holstein-Primakoff picture invalid: nb = {nb} >= N/2 = {half}")]
    HptValidity { nb: f64, half: f64 },

    #[error("usage: {0}")]
    Usage(String),

    #[error("refusing run: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
