use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model evaluation failed at t={t}, series={series}: {message}")]
    ModelEvaluation {
        t: usize,
        series: usize,
        message: String,
    },

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("missing statistic term for subset {subset:?}, lag {lag:?}")]
    MissingTerm { subset: Vec<usize>, lag: Vec<i64> },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
