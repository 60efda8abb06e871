use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {detail}")]
    Validation { detail: String, id: Option<String> },

    #[error("{what} not found: {id}")]
    NotFound { what: &'static str, id: String },

    #[error("conflict: {detail}")]
    Conflict { detail: String, id: Option<String> },

    #[error("stale revision: request expected {expected}, document is at {current}")]
    StaleRevision { expected: u64, current: u64 },

    #[error("document violates {} invariant(s): {}", .0.len(), summarize(.0))]
    InvalidDocument(Vec<Violation>),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported schema version {found:?}")]
    UnsupportedVersion { found: Option<String> },

    #[error("search index built at revision {index_revision} but model is at {model_revision}")]
    StaleIndex {
        index_revision: u64,
        model_revision: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("incomplete session log: {0}")]
    IncompleteLog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn validation(detail: impl Into<String>) -> Self {
        Error::Validation {
            detail: detail.into(),
            id: None,
        }
    }

    pub(crate) fn validation_at(detail: impl Into<String>, id: impl Into<String>) -> Self {
        Error::Validation {
            detail: detail.into(),
            id: Some(id.into()),
        }
    }

    pub(crate) fn not_found(what: &'static str, id: impl Into<String>) -> Self {
        Error::NotFound {
            what,
            id: id.into(),
        }
    }

    /// The id of the node, link or evidence item the error is about, if any.
    pub fn offending_id(&self) -> Option<&str> {
        match self {
            Error::Validation { id, .. } | Error::Conflict { id, .. } => id.as_deref(),
            Error::NotFound { id, .. } => Some(id),
            Error::InvalidDocument(v) => v.first().map(|v| v.id.as_str()),
            _ => None,
        }
    }
}
