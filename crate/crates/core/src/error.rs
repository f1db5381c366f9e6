use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A file header or text record could not be parsed.
    #[error("parse error in {field}: {detail}")]
    Parse { field: &'static str, detail: String },

    #[error("invalid dimensions {width}x{height}")]
    InvalidDimension { width: usize, height: usize },

    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("sample {index} is {value}, outside [0, 1] or not finite")]
    InvalidSample { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input planes are too small for an operator or disagree in size.
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("coordinate ({x}, {y}) outside {width}x{height}")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },

    #[error("shape model has no edge pixels")]
    EmptyModel,

    #[error("png: {0}")]
    Png(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
