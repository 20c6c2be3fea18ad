use std::fmt;
use std::path::Path;

use neurocausal::Error;

use crate::{EXIT_ANALYSIS, EXIT_IO, EXIT_USAGE};

/// A command failure, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Analysis(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Analysis(_) => EXIT_ANALYSIS,
        }
    }

    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Analysis(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => Failure::Io(e.to_string()),
            Error::InvalidInput(_)
            | Error::UnknownVariable(_)
            | Error::Parse { .. }
            | Error::Cycle => Failure::Usage(e.to_string()),
            Error::Faithfulness { .. }
            | Error::Capacity { .. }
            | Error::Degenerate(_)
            | Error::Contradiction(..) => Failure::Analysis(e.to_string()),
        }
    }
}
