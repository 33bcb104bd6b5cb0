use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter domain error: {0}")]
    ParamDomain(String),

    #[error("zero finder did not converge for k = {k}")]
    Convergence { k: usize },

    #[error("integration error: {0}")]
    Integration(String),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("truncation error for mode {k}: envelope only reached {achieved:e}")]
    Truncation { k: usize, achieved: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::ParamDomain(msg.into())
    }
}
