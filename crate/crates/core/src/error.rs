use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate layer: {0}")]
    DegenerateLayer(String),

    #[error("not a survival function: {0}")]
    NotSurvival(String),

    #[error("non-summable curve: {0}")]
    NonSummable(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
