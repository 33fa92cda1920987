use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml { line: u32, column: u32, message: String },

    #[error("invalid <{element}> at line {line}: {message}")]
    Invalid {
        element: String,
        line: u32,
        message: String,
    },

    #[error("duplicate {kind} id `{id}`")]
    Duplicate { kind: &'static str, id: String },

    #[error("task `{task}` depends on unknown task `{missing}`")]
    UnknownReference { task: String, missing: String },

    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("not a partition of the task set: {0}")]
    Partition(String),

    #[error("agent map line {line}: {message}")]
    AgentMap { line: usize, message: String },

    #[error("task `{task}` has no eligible resource on agent `{agent}`")]
    Infeasible { task: String, agent: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("protocol timeout waiting for {0}")]
    Timeout(String),

    #[error("invalid generator parameters: {0}")]
    Generator(String),

    #[error("schedule file: {0}")]
    Schedule(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Attaches the offending file to an error so diagnostics name it.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Strips file context.
    pub fn root(&self) -> &Error {
        match self {
            Error::File { source, .. } => source.root(),
            other => other,
        }
    }
}
