use std::io;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
///
/// Variants are grouped by the class of failure rather than by module so
/// that callers (the CLI in particular) can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input.
    #[error("{source_name}:{line}: malformed field `{field}`: {message}")]
    Parse {
        source_name: String,
        line: usize,
        field: String,
        message: String,
    },

    /// Structurally valid input that violates a graph invariant
    /// (dangling reference, cycle).
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("lookup error: {0}")]
    Lookup(String),

    /// A configuration that cannot be satisfied by the data.
    #[error("configuration error: {0}")]
    Config(String),

    /// A parameter outside its documented domain.
    #[error("parameter error: {0}")]
    Param(String),

    #[error("rendering error: unsupported character {0:?}")]
    Render(char),

    #[error("structural error at {layer}: {message}")]
    Structural { layer: String, message: String },

    #[error("state error: {0}")]
    State(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// Binary file format violation (bad magic, version, truncation).
    #[error("format error: {0}")]
    Format(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("unknown concept {name:?}; nearest labels: {}", suggestions.join(", "))]
    UnknownConcept {
        name: String,
        suggestions: Vec<String>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(
        source_name: &str,
        line: usize,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn structural(layer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Structural {
            layer: layer.into(),
            message: message.into(),
        }
    }
}
