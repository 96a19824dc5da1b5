use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid coloring: {0}")]
    InvalidColoring(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not a product policy: {0}")]
    NonProductPolicy(String),
    #[error("bandit: {0}")]
    Bandit(String),
    #[error("linear program: {0}")]
    Lp(String),
    #[error("shared randomness desynchronized: {0}")]
    Desync(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
