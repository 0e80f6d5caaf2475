use thiserror::Error;

/// Errors raised by the propagators, oracles and front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unstable regime: {0}")]
    Unstable(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("exceptional point: {0}")]
    ExceptionalPoint(String),

    #[error("non-normalizable state: R(t) = {r} at t = {t}")]
    NonNormalizable { t: f64, r: f64 },

    #[error("quadrature did not converge: estimated error {estimate:e} after {evaluations} evaluations")]
    Quadrature { estimate: f64, evaluations: usize },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidState(_) => "invalid_state",
            Error::Unstable(_) => "unstable",
            Error::Singular(_) => "singular",
            Error::ExceptionalPoint(_) => "exceptional_point",
            Error::NonNormalizable { .. } => "non_normalizable",
            Error::Quadrature { .. } => "quadrature",
            Error::Integration(_) => "integration",
            Error::Truncation(_) => "truncation",
            Error::Eigen(_) => "eigen",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
