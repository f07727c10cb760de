use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus contains no (in-vocabulary) tokens")]
    EmptyCorpus,

    #[error("context window must be at least 1, got {0}")]
    InvalidWindow(usize),

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("vector for `{0}` has (near-)zero norm")]
    DegenerateVector(String),

    #[error("word `{0}` is not in the vocabulary")]
    UnknownWord(String),

    #[error("word `{0}` has no co-occurrence mass")]
    DegenerateWord(String),

    #[error("pair {0}:{1} has an all-zero C-vector")]
    DegeneratePair(String, String),

    #[error("mean offset is the zero vector")]
    DegenerateMean,

    #[error("need at least {needed} false offsets, have {available}")]
    InsufficientNegatives { needed: usize, available: usize },

    #[error("only {found} in-vocabulary pairs, need at least {needed}")]
    InsufficientCoverage { found: usize, needed: usize },

    #[error("cannot construct co-occurrence statistics: {0}")]
    InfeasibleConstruction(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(offset: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
