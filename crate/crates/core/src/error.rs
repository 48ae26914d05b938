use thiserror::Error;

/// Errors raised by the simulator and its numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numerical routine failed to meet its contract.
    #[error("numerical failure in {routine}: {detail}")]
    Numerical {
        routine: &'static str,
        detail: String,
    },

    /// Argument outside a function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Not enough data points to perform a fit.
    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by user input rather than the runtime environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Numerical { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
