use thiserror::Error;

use crate::graph::CiStatement;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("edge set contains a directed cycle")]
    Cycle,

    #[error("{observed} observed variables exceed the enumeration cap of {cap}")]
    Capacity { observed: usize, cap: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("contradictory statements: `{0}` and `{1}`")]
    Contradiction(Box<CiStatement>, Box<CiStatement>),

    #[error("no structure is faithful to the supplied statements; closest candidate violates: {}", list(.violated))]
    Faithfulness { violated: Vec<CiStatement> },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn list(statements: &[CiStatement]) -> String {
    statements
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
