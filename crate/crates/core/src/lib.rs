pub mod citest;
pub mod error;
pub mod graph;
pub mod interpret;
pub mod relevance;
pub mod scm;

pub use error::{Error, Result};
