use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("accuracy check failed: {0}")]
    Accuracy(String),
    #[error("singular parameters: {0}")]
    SingularParameter(String),
    #[error("moment inequality violated: {0}")]
    MomentInequality(String),
    #[error("singular input: {0}")]
    SingularInput(String),
    #[error("truncation order too low: {0}")]
    TruncationOrder(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
