use thiserror::Error;

use crate::qlinalg::LinalgError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("state diagnostics breached at t = {time:.4} ns: trace error {trace_error:.3e}, Hermiticity error {hermiticity_error:.3e} (limit {limit:.1e}); reduce dt or check that the coupling is weak")]
    Diagnostics { time: f64, trace_error: f64, hermiticity_error: f64, limit: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{source} (config: {config})")]
    WithConfig {
        #[source]
        source: Box<Error>,
        config: String,
    },
}

impl Error {
    /// Process exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::Domain(_) | Error::Io(_) => 2,
            Error::Linalg(_) | Error::NumericalFailure(_) | Error::Diagnostics { .. } => 3,
            Error::WithConfig { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
