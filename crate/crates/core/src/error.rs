use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("image has no foreground content")]
    NoContent,

    #[error("unknown letter {0:?}: not one of the 28 Arabic base letters")]
    UnknownLetter(String),

    #[error("corrupt database: {0}")]
    CorruptDatabase(String),

    #[error("template database is empty")]
    EmptyDatabase,

    #[error("cursor {cursor} is past the word width {width}")]
    CursorExhausted { cursor: usize, width: usize },

    #[error("template database has no entry for letter {0}")]
    MissingLetter(char),

    #[error("word spec {index}: {source}")]
    Spec {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("evaluation corpus is empty")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
