use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register layout conflict: {0}")]
    LayoutConflict(String),

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("partial trace needs at least one register to keep; use trace() for the scalar")]
    EmptyKeep,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operator is not unitary (max deviation {0:e})")]
    NonUnitary(f64),

    #[error("not a partial isometry: {0}")]
    NotIsometry(String),

    #[error("invalid database: {0}")]
    Database(String),

    #[error("multi-answer database needs an explicit branch selector for index {0}")]
    AmbiguousAnswer(usize),

    #[error("invalid query: {0}")]
    Query(String),

    #[error("strategy scope violation: {0}")]
    Scope(String),

    #[error("invalid strategy: {0}")]
    Strategy(String),

    #[error("conditional state undefined: {0}")]
    Degenerate(String),

    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
