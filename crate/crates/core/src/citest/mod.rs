//! Conditional independence decisions, exact (graph oracle) or statistical
//! (tests on a [`Dataset`](crate::scm::Dataset)), behind one interface.

mod gtest;
mod partial;
mod provider;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{CiStatement, Verdict};
use crate::relevance::Provenance;

pub use gtest::{conditional_g_test, MIN_EXPECTED_COUNT};
pub use partial::{numeric_view, partial_correlation};
pub use provider::{ci_provider, DataCi, DEFAULT_ALPHA};

/// Anything that can answer `a ⊥ b | given` over a fixed set of observed
/// variables.
pub trait CiProvider: Send + Sync {
    fn query(&self, a: &str, b: &str, given: &BTreeSet<String>) -> Result<CiAnswer>;

    /// Observed variables this provider can be queried about.
    fn variables(&self) -> Vec<String>;

    fn provenance(&self) -> Provenance;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    PartialCorrelationFisherZ,
    ConditionalGTest,
}

/// Outcome of one statistical test. The verdict is `Independent` iff
/// `p_value > alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiDecision {
    pub statement: CiStatement,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub method: CiMethod,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CiAnswer {
    Oracle(CiStatement),
    Tested(CiDecision),
}

impl CiAnswer {
    pub fn statement(&self) -> &CiStatement {
        match self {
            CiAnswer::Oracle(s) => s,
            CiAnswer::Tested(d) => &d.statement,
        }
    }

    pub fn verdict(&self) -> Verdict {
        self.statement().verdict
    }

    pub fn p_value(&self) -> Option<f64> {
        match self {
            CiAnswer::Oracle(_) => None,
            CiAnswer::Tested(d) => Some(d.p_value),
        }
    }

    pub fn decision(&self) -> Option<&CiDecision> {
        match self {
            CiAnswer::Oracle(_) => None,
            CiAnswer::Tested(d) => Some(d),
        }
    }
}

impl<T: CiProvider + ?Sized> CiProvider for &T {
    fn query(&self, a: &str, b: &str, given: &BTreeSet<String>) -> Result<CiAnswer> {
        (**self).query(a, b, given)
    }

    fn variables(&self) -> Vec<String> {
        (**self).variables()
    }

    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
}

/// Queries every pair of `names` (in list order) given every subset of the
/// remaining names (in ascending bitmask order) and collects the statements.
pub fn all_statements(ci: &dyn CiProvider, names: &[&str]) -> Result<Vec<CiStatement>> {
    let n = names.len();
    if n > 20 {
        return Err(crate::error::Error::input(
            "too many variables to query exhaustively",
        ));
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let rest: Vec<&str> = (0..n)
                .filter(|&k| k != i && k != j)
                .map(|k| names[k])
                .collect();
            for mask in 0u32..(1 << rest.len()) {
                let given: BTreeSet<String> = (0..rest.len())
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| rest[b].to_string())
                    .collect();
                out.push(ci.query(names[i], names[j], &given)?.statement().clone());
            }
        }
    }
    Ok(out)
}
