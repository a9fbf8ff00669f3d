use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical consistency check failed: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("series too short: need at least {need} values, got {got}")]
    TooShort { need: usize, got: usize },

    #[error("correlation undefined: {0} has zero variance")]
    ZeroVariance(&'static str),

    #[error("quadrature did not converge: estimated error {0:e}")]
    Quadrature(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn range_err(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Range {
        what,
        detail: detail.into(),
    }
}
