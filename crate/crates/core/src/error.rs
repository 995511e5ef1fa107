use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular value decomposition did not converge")]
    NoConvergence,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage} stage: {inner}")]
    Stage {
        stage: &'static str,
        inner: Box<Error>,
    },
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Input,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Dimension(_)
            | Error::InvalidParameter(_)
            | Error::LengthMismatch { .. }
            | Error::Unsupported(_) => ErrorClass::Usage,
            Error::Parse { .. } | Error::Io(_) => ErrorClass::Input,
            Error::NonFinite { .. } | Error::Degenerate(_) | Error::NoConvergence => {
                ErrorClass::Numeric
            }
            Error::Stage { inner, .. } => inner.class(),
        }
    }

    pub(crate) fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |inner| Error::Stage {
            stage,
            inner: Box::new(inner),
        }
    }
}
