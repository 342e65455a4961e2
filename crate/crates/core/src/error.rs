use thiserror::Error;

use crate::script_graph::Edge;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Inserting or keeping `edge` would close a directed cycle.
    #[error("cycle violation: edge {}->{} closes a directed cycle", edge.0, edge.1)]
    Cycle { edge: Edge },

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("undeclared identifier `{ident}` at {line}:{column}")]
    Undeclared {
        ident: String,
        line: usize,
        column: usize,
    },

    #[error("parse failure: {0}")]
    ParseFailure(String),

    #[error("graph too large for exact search: {nodes} nodes > limit {limit}")]
    SizeLimit { nodes: usize, limit: usize },

    #[error("line {line}: malformed JSON: {message}")]
    Json { line: usize, message: String },

    #[error("line {line}: schema violation (missing: [{}], extra: [{}]){}", missing.join(", "), extra.join(", "), detail.as_deref().map(|d| format!(": {d}")).unwrap_or_default())]
    Schema {
        line: usize,
        missing: Vec<String>,
        extra: Vec<String>,
        detail: Option<String>,
    },

    #[error("edit script post-check failed: {0}")]
    PostCheck(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
