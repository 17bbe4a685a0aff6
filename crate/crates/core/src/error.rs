use thiserror::Error;

/// Crate-wide error type.
///
/// The CLI maps these onto exit codes: usage/config problems (bad family
/// specs, parity hypothesis violations, malformed configs) are distinct
/// from invariant violations in data structures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid invariant violated: {0}")]
    GridInvariant(String),

    #[error("family error: {0}")]
    Family(String),

    #[error("quadrature error: {0}")]
    Quadrature(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("class membership error: {0}")]
    Class(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
