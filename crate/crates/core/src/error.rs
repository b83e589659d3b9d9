use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("I/O error: {0}")]
    Stream(#[from] io::Error),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("line {line}: invalid UTF-8")]
    InvalidUtf8 { line: usize },

    #[error("parallel files differ in length: {lines_a} lines vs {lines_b} lines")]
    LineCountMismatch { lines_a: usize, lines_b: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not a checkpoint file (bad magic)")]
    BadMagic,

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("checkpoint is truncated")]
    Truncated,

    #[error("checkpoint checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("checkpoint shape mismatch: {0}")]
    Shape(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("language {found:?} is not one of the model languages {expected:?}")]
    LanguageMismatch { found: String, expected: [String; 2] },

    #[error("unknown token {query:?}; close matches: {}", suggestions.join(", "))]
    UnknownToken {
        query: String,
        suggestions: Vec<String>,
    },

    #[error("{0}")]
    Undefined(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
