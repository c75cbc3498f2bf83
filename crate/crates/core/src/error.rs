use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the range where a model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Beamwidths exceed the narrow-beam regime of the Gaussian beam model.
    #[error("beam model not valid: {0}")]
    ModelValidity(String),

    /// Geometry that cannot describe a linear deployment.
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("topology leaves relay {0} unreachable from the base station")]
    Disconnected(usize),

    #[error("brute-force oracle supports at most 2 relays, got {0}")]
    OracleTooLarge(usize),

    /// Unreadable or inconsistent scenario configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
