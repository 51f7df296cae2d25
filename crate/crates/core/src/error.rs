use std::path::PathBuf;

use crate::label::GoldLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Schema {
        file: String,
        line: usize,
        message: String,
    },

    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),

    #[error("dangling reference in {file}:{line}: {message}")]
    DanglingReference {
        file: String,
        line: usize,
        message: String,
    },

    #[error("not enough candidates for {label}: need {needed}, have {available} (short by {})", needed - available)]
    InsufficientCandidates {
        label: GoldLabel,
        needed: usize,
        available: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown value `{value}` for {what}")]
    UnknownValue { what: &'static str, value: String },

    #[error("strategy `{0}` requires a knowledge graph")]
    MissingGraph(String),

    #[error("strategy `{0}` requires demonstrations")]
    MissingDemos(String),

    #[error("offsets {start}..{end} out of range for instance {id}")]
    OffsetsOutOfRange { id: String, start: usize, end: usize },

    #[error("template error: {0}")]
    Template(String),

    #[error("record references unknown instance `{0}`")]
    UnknownInstance(String),

    #[error("no valid records to score")]
    NoValidRecords,

    #[error("empty input: {0}")]
    Empty(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Schema {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}
