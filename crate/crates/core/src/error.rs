use thiserror::Error;

/// Errors raised by the numerical routines and the file/CLI surfaces.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series majorant could not be certified.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// A quadrature or solver did not reach the requested accuracy.
    #[error("accuracy error: {message} (best estimate {estimate:e})")]
    Accuracy { message: String, estimate: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
