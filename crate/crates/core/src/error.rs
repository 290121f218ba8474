use std::io;

/// Errors produced by the library and the command line driver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrand is still above tolerance at the edge of the integration window.
    #[error("integration window too small: |f| = {value:e} at x = {x} exceeds tolerance {tol:e}")]
    WindowTooSmall { x: f64, value: f64, tol: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A Monte Carlo target larger than the desk-scale cap.
    #[error("configuration has {requested} atoms, above the sampling cap of {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::WindowTooSmall { .. } => "window_too_small",
            Error::Config(_) => "config",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::Io(_) => "io",
            Error::Serialization(_) => "serialization",
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
