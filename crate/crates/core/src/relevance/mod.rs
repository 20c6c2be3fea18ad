//! Encoding- and decoding-relevant feature sets.
//!
//! A feature is encoding-relevant when it depends on the experimental
//! condition marginally, and decoding-relevant when it depends on the
//! condition given every other feature. Both are computed from any
//! [`CiProvider`], so the same code runs on the true graph or on data.

mod rfe;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::citest::{CiAnswer, CiProvider};
use crate::error::{Error, Result};

pub use rfe::{rfe_decoding_set, rfe_report, FeatureImportance, RfeParams, RfeReport};

/// Where a set of relevance decisions came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Provenance {
    Oracle,
    Statistical {
        alpha: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        bonferroni: Option<usize>,
    },
    Rfe(RfeParams),
}

impl Provenance {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            Provenance::Statistical { alpha, .. } => Some(*alpha),
            Provenance::Rfe(params) => Some(params.level),
            Provenance::Oracle => None,
        }
    }
}

/// Relevant/irrelevant split of a feature list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub relevant: BTreeSet<String>,
    pub irrelevant: BTreeSet<String>,
}

impl Partition {
    fn split(features: &[String], relevant: BTreeSet<String>) -> Self {
        let irrelevant = features
            .iter()
            .filter(|f| !relevant.contains(*f))
            .cloned()
            .collect();
        Partition {
            relevant,
            irrelevant,
        }
    }

    pub fn is_relevant(&self, feature: &str) -> bool {
        self.relevant.contains(feature)
    }
}

/// One CI query issued while computing relevance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub model: ModelDirection,
    pub feature: String,
    pub statement: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelDirection {
    Encoding,
    Decoding,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelevanceSets {
    pub condition: String,
    pub features: Vec<String>,
    pub encoding: Option<Partition>,
    pub decoding: Option<Partition>,
    pub provenance: Provenance,
    pub queries: Vec<QueryRecord>,
}

impl RelevanceSets {
    pub fn encoding_relevant(&self) -> Option<&BTreeSet<String>> {
        self.encoding.as_ref().map(|p| &p.relevant)
    }

    pub fn decoding_relevant(&self) -> Option<&BTreeSet<String>> {
        self.decoding.as_ref().map(|p| &p.relevant)
    }

    /// Report object: feature name → `{encoding, decoding}` memberships
    /// (`null` when that partition was not computed), plus provenance and the
    /// issued queries.
    pub fn to_json(&self) -> Value {
        let membership = |p: &Option<Partition>, f: &str| p.as_ref().map(|p| p.is_relevant(f));
        let features: BTreeMap<&str, Value> = self
            .features
            .iter()
            .map(|f| {
                (
                    f.as_str(),
                    json!({
                        "encoding": membership(&self.encoding, f),
                        "decoding": membership(&self.decoding, f),
                    }),
                )
            })
            .collect();
        json!({
            "condition": self.condition,
            "features": features,
            "provenance": self.provenance,
            "queries": self.queries,
        })
    }
}

fn check_inputs(condition: &str, features: &[&str]) -> Result<()> {
    if features.contains(&condition) {
        return Err(Error::input(format!(
            "condition `{condition}` is also listed as a feature"
        )));
    }
    let unique: BTreeSet<&&str> = features.iter().collect();
    if unique.len() != features.len() {
        return Err(Error::input("feature list contains duplicates"));
    }
    Ok(())
}

fn given_of(features: &[&str], except: Option<&str>) -> BTreeSet<String> {
    features
        .iter()
        .filter(|f| Some(**f) != except)
        .map(|f| f.to_string())
        .collect()
}

fn encoding_queries(
    ci: &dyn CiProvider,
    condition: &str,
    features: &[&str],
) -> Result<Vec<(String, CiAnswer)>> {
    check_inputs(condition, features)?;
    features
        .iter()
        .map(|f| Ok((f.to_string(), ci.query(f, condition, &BTreeSet::new())?)))
        .collect()
}

fn decoding_queries(
    ci: &dyn CiProvider,
    condition: &str,
    features: &[&str],
) -> Result<Vec<(String, CiAnswer)>> {
    check_inputs(condition, features)?;
    features
        .iter()
        .map(|f| {
            Ok((
                f.to_string(),
                ci.query(f, condition, &given_of(features, Some(f)))?,
            ))
        })
        .collect()
}

fn dependent_features(answers: &[(String, CiAnswer)]) -> BTreeSet<String> {
    answers
        .iter()
        .filter(|(_, a)| !a.verdict().is_independent())
        .map(|(f, _)| f.clone())
        .collect()
}

/// Features that depend on the condition marginally.
pub fn encoding_relevant_set(
    ci: &dyn CiProvider,
    condition: &str,
    features: &[&str],
) -> Result<BTreeSet<String>> {
    Ok(dependent_features(&encoding_queries(
        ci, condition, features,
    )?))
}

/// Features that depend on the condition given all remaining features.
pub fn decoding_relevant_set(
    ci: &dyn CiProvider,
    condition: &str,
    features: &[&str],
) -> Result<BTreeSet<String>> {
    Ok(dependent_features(&decoding_queries(
        ci, condition, features,
    )?))
}

/// Both partitions from one provider, with every query recorded.
pub fn relevance_sets(
    ci: &dyn CiProvider,
    condition: &str,
    features: &[&str],
) -> Result<RelevanceSets> {
    let enc = encoding_queries(ci, condition, features)?;
    let dec = decoding_queries(ci, condition, features)?;
    let owned: Vec<String> = features.iter().map(|f| f.to_string()).collect();
    let record = |model, answers: &[(String, CiAnswer)]| {
        answers
            .iter()
            .map(move |(f, a)| QueryRecord {
                model,
                feature: f.clone(),
                statement: a.statement().to_string(),
                p_value: a.p_value(),
            })
            .collect::<Vec<_>>()
    };
    let mut queries = record(ModelDirection::Encoding, &enc);
    queries.extend(record(ModelDirection::Decoding, &dec));
    Ok(RelevanceSets {
        condition: condition.to_string(),
        encoding: Some(Partition::split(&owned, dependent_features(&enc))),
        decoding: Some(Partition::split(&owned, dependent_features(&dec))),
        features: owned,
        provenance: ci.provenance(),
        queries,
    })
}

/// Decoding-only relevance sets estimated by permutation-based elimination.
pub fn rfe_relevance_sets(
    data: &crate::scm::Dataset,
    condition: &str,
    params: &RfeParams,
) -> Result<RelevanceSets> {
    let report = rfe_report(data, condition, params)?;
    let features: Vec<String> = data.features().into_iter().map(String::from).collect();
    Ok(RelevanceSets {
        condition: condition.to_string(),
        decoding: Some(Partition::split(&features, report.relevant.clone())),
        encoding: None,
        features,
        provenance: Provenance::Rfe(params.clone()),
        queries: Vec::new(),
    })
}
