use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while loading inputs, planning, or writing reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The input is not well-formed JSON.
    #[error("parse error: {0}")]
    Parse(String),

    /// Well-formed JSON that does not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A field holds a value that violates a documented invariant.
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("numerical input error: {0}")]
    NumericalInput(String),

    #[error("input error: {0}")]
    Input(String),

    /// The planner produced no candidate to execute.
    #[error("planner fault: {0}")]
    PlannerFault(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Maps a serde_json failure onto the parse/schema split.
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match err.classify() {
            Category::Data => Error::Schema(err.to_string()),
            Category::Io | Category::Syntax | Category::Eof => Error::Parse(err.to_string()),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PlannerFault(_) => 3,
            Error::Io { .. }
            | Error::Parse(_)
            | Error::Schema(_)
            | Error::Validation { .. }
            | Error::Config { .. }
            | Error::NumericalInput(_)
            | Error::Input(_) => 2,
        }
    }
}
