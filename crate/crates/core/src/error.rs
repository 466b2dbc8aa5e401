use std::io;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element cap exceeded: {kind} count {count} > cap {cap}")]
    CapExceeded {
        kind: &'static str,
        count: usize,
        cap: usize,
    },

    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("segment has conflicting elements: {0}")]
    Conflicting(String),

    #[error("start cell ({col}, {row}) is not a standing cell")]
    NotStanding { col: usize, row: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("feature kind mismatch at slot {0}")]
    KindMismatch(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no constructive primitive satisfied {constraint} within {attempts} attempts")]
    Unsatisfiable { constraint: String, attempts: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
