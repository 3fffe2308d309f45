use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by pipeline stage so callers can map them onto
/// exit codes: configuration/validation problems, data problems, and
/// training problems.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a documented range or shape constraint.
    #[error("invalid {what}: {message}")]
    Validation { what: String, message: String },

    /// A required column is missing from an input table.
    #[error("schema {schema}: missing required column `{column}`")]
    MissingColumn { schema: String, column: String },

    /// A cell could not be parsed or holds a non-finite value.
    #[error("row {row}, column `{column}`: {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    /// The table as a whole is unusable (empty, single-class, ...).
    #[error("data error: {0}")]
    Data(String),

    /// Training aborted (degenerate input, non-finite gradient, ...).
    #[error("training error: {0}")]
    Training(String),

    /// Two paired vectors have different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn validation(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            what: what.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the input data rather than by configuration.
    pub fn is_data(&self) -> bool {
        matches!(
            self,
            Error::MissingColumn { .. } | Error::Cell { .. } | Error::Data(_) | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
