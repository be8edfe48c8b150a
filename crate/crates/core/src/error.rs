use std::fmt;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Where in a CoNLL-U stream a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub sent_id: Option<String>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.sent_id {
            Some(id) => write!(f, "line {} (sentence {})", self.line, id),
            None => write!(f, "line {}", self.line),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{location}: expected 10 tab-separated columns, found {found}")]
    ColumnCount { location: Location, found: usize },

    #[error("{location}: malformed {field}: {value:?}")]
    Malformed {
        location: Location,
        field: &'static str,
        value: String,
    },

    #[error("{location}: token id {id} does not follow {previous}")]
    NonMonotonicId {
        location: Location,
        id: u32,
        previous: u32,
    },

    #[error("{location}: duplicate MISC key {key:?}")]
    DuplicateMiscKey { location: Location, key: String },

    #[error("invalid feature string {0:?}")]
    Feature(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("infeasible split for {period}: {constraint}: {detail}")]
    Infeasible {
        period: String,
        constraint: &'static str,
        detail: String,
    },

    #[error("{0}")]
    Period(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
