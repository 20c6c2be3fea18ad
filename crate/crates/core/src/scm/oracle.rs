use std::collections::BTreeSet;

use crate::citest::{CiAnswer, CiProvider};
use crate::error::{Error, Result};
use crate::graph::{d_separated, CiStatement, Dag, VariableRole, Verdict};
use crate::relevance::Provenance;

use super::Scm;

/// Exact CI answers read off the true graph by d-separation.
#[derive(Clone, Debug)]
pub struct GraphOracle {
    dag: Dag,
}

impl GraphOracle {
    pub fn new(dag: Dag) -> Self {
        GraphOracle { dag }
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }
}

/// CI oracle over the observed variables of `scm`; mechanisms are ignored.
pub fn oracle(scm: &Scm) -> GraphOracle {
    GraphOracle::new(scm.dag().clone())
}

impl CiProvider for GraphOracle {
    fn query(&self, a: &str, b: &str, given: &BTreeSet<String>) -> Result<CiAnswer> {
        for name in [a, b].into_iter().chain(given.iter().map(String::as_str)) {
            let i = self.dag.index_of(name)?;
            if self.dag.role(i) == VariableRole::Hidden {
                return Err(Error::input(format!(
                    "`{name}` is hidden and cannot be queried"
                )));
            }
        }
        let separated = d_separated(&self.dag, a, b, given)?;
        Ok(CiAnswer::Oracle(CiStatement {
            lhs: a.to_string(),
            rhs: b.to_string(),
            given: given.clone(),
            verdict: Verdict::from_separated(separated),
        }))
    }

    fn variables(&self) -> Vec<String> {
        self.dag
            .observed_names()
            .into_iter()
            .map(String::from)
            .collect()
    }

    fn provenance(&self) -> Provenance {
        Provenance::Oracle
    }
}
