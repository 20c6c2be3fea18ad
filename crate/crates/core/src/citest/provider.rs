use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::graph::{CiStatement, Verdict};
use crate::relevance::Provenance;
use crate::scm::{ColumnData, Dataset};

use super::{conditional_g_test, partial_correlation, CiAnswer, CiDecision, CiMethod, CiProvider};

pub const DEFAULT_ALPHA: f64 = 0.01;

type QueryKey = (String, String, BTreeSet<String>);

/// Statistical CI provider over one dataset.
///
/// Queries touching only categorical columns use the conditional G test.
/// Anything else uses partial correlation, with binary categorical columns
/// encoded as ±1; a categorical column with more than two levels mixed with
/// numeric columns is rejected. Answers are memoized under the
/// order-insensitive query key, so `(a, b | Z)` and `(b, a | Z)` yield the
/// same decision.
pub struct DataCi {
    data: Dataset,
    alpha: f64,
    bonferroni: Option<usize>,
    memo: Mutex<HashMap<QueryKey, CiDecision>>,
}

pub fn ci_provider(data: Dataset, alpha: f64) -> Result<DataCi> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(DataCi {
        data,
        alpha,
        bonferroni: None,
        memo: Mutex::new(HashMap::new()),
    })
}

impl DataCi {
    /// Divides alpha by `queries`, the number of tests one analysis will run.
    pub fn with_bonferroni(mut self, queries: usize) -> Self {
        self.bonferroni = Some(queries.max(1));
        self.memo.get_mut().expect("memo lock poisoned").clear();
        self
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Per-test level after any multiple-comparison correction.
    pub fn effective_alpha(&self) -> f64 {
        self.alpha / self.bonferroni.unwrap_or(1) as f64
    }

    pub fn decide(&self, a: &str, b: &str, given: &BTreeSet<String>) -> Result<CiDecision> {
        let (lhs, rhs) = if a <= b { (a, b) } else { (b, a) };
        let key = (lhs.to_string(), rhs.to_string(), given.clone());
        if let Some(hit) = self.memo.lock().expect("memo lock poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let decision = self.compute(lhs, rhs, given)?;
        self.memo
            .lock()
            .expect("memo lock poisoned")
            .entry(key)
            .or_insert(decision.clone());
        Ok(decision)
    }

    fn method_for(&self, names: &[&str]) -> Result<CiMethod> {
        let mut categorical = 0;
        let mut wide = None;
        for name in names {
            let col = self.data.column(name)?;
            if let ColumnData::Categorical(_) = col.data {
                categorical += 1;
                if col.data.levels() > Some(2) {
                    wide = Some(*name);
                }
            }
        }
        if categorical == names.len() {
            Ok(CiMethod::ConditionalGTest)
        } else if let Some(name) = wide {
            Err(Error::input(format!(
                "mixed-type query: categorical `{name}` has more than two levels and the other columns are numeric"
            )))
        } else {
            Ok(CiMethod::PartialCorrelationFisherZ)
        }
    }

    fn compute(&self, lhs: &str, rhs: &str, given: &BTreeSet<String>) -> Result<CiDecision> {
        let names: Vec<&str> = [lhs, rhs]
            .into_iter()
            .chain(given.iter().map(String::as_str))
            .collect();
        let method = self.method_for(&names)?;
        let (statistic, p_value) = match method {
            CiMethod::PartialCorrelationFisherZ => {
                partial_correlation(&self.data, lhs, rhs, given)?
            }
            CiMethod::ConditionalGTest => conditional_g_test(&self.data, lhs, rhs, given)?,
        };
        let alpha = self.effective_alpha();
        let verdict = if p_value > alpha {
            Verdict::Independent
        } else {
            Verdict::Dependent
        };
        Ok(CiDecision {
            statement: CiStatement::new(lhs, rhs, given.iter().cloned(), verdict)?,
            statistic,
            p_value,
            alpha,
            method,
        })
    }
}

impl CiProvider for DataCi {
    fn query(&self, a: &str, b: &str, given: &BTreeSet<String>) -> Result<CiAnswer> {
        self.decide(a, b, given).map(CiAnswer::Tested)
    }

    fn variables(&self) -> Vec<String> {
        self.data
            .column_names()
            .into_iter()
            .map(String::from)
            .collect()
    }

    fn provenance(&self) -> Provenance {
        Provenance::Statistical {
            alpha: self.alpha,
            bonferroni: self.bonferroni,
        }
    }
}
