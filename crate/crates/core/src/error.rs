use thiserror::Error;

use crate::sampled_line::Interval;

/// Errors produced across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grids are not compatible: {0}")]
    GridMismatch(String),

    /// `w^{-1/(p-1)}` is not integrable on the reported interval.
    #[error("dual weight is not integrable on [{}, {}]", .0.left(), .0.right())]
    NonIntegrableDual(Interval),

    #[error("weight has zero infimum on [{}, {}]", .0.left(), .0.right())]
    ZeroInfimum(Interval),

    #[error("A_infinity check needs at least one subset")]
    EmptySubsetFamily,

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("function `{0}` has zero norm")]
    ZeroDenominator(String),

    #[error("mismatched configuration: {0}")]
    MismatchedConfig(String),

    #[error("point does not belong to the flow's space")]
    PointMismatch,

    /// A literal failed to parse; `token` names the offending piece.
    #[error("cannot parse `{literal}`: {message} (at `{token}`)")]
    Literal {
        literal: String,
        token: String,
        message: String,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Config {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
