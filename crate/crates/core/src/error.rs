use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of an operation (inverse of zero, empty span, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported field: {0}")]
    UnsupportedField(String),

    /// The contraction of the trilinear form at a 1-point or 2-point does not have rank 4.
    #[error("invalid {role}: contraction has rank {rank}, expected 4")]
    InvalidRolePoint { role: &'static str, rank: usize },

    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("construction fault: {0}")]
    ConstructionFault(String),

    #[error("not a generalized hexagon: {0}")]
    NotAHexagon(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
