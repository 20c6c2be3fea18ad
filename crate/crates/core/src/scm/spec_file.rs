//! SCM spec files: TOML with one `[[variable]]` table per variable, in
//! variable order.
//!
//! ```toml
//! experiment = "stimulus-based"
//!
//! [[variable]]
//! name = "S"
//! role = "stimulus"
//! parents = []
//! mechanism = "discrete-cpt"
//! cardinality = 2
//! table = [[0.5, 0.5]]
//!
//! [[variable]]
//! name = "X1"
//! role = "feature"
//! parents = ["S"]
//! mechanism = "linear-gaussian"
//! intercept = 0.0
//! noise_variance = 1.0
//! weights = { S = 1.0 }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bits, Dag, Variable, VariableRole};

use super::{ExperimentKind, Mechanism, Scm};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    experiment: ExperimentKind,
    variable: Vec<VariableSpec>,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MechanismKind {
    LinearGaussian,
    DiscreteCpt,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableSpec {
    name: String,
    role: VariableRole,
    #[serde(default)]
    parents: Vec<String>,
    mechanism: MechanismKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cardinality: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<Vec<Vec<f64>>>,
}

impl Scm {
    pub fn to_spec_string(&self) -> String {
        let dag = self.dag();
        let variable = self
            .mechanisms()
            .enumerate()
            .map(|(i, (name, m))| {
                let parents = bits(dag.parents(i))
                    .map(|p| dag.name(p).to_string())
                    .collect();
                let mut spec = VariableSpec {
                    name: name.to_string(),
                    role: dag.role(i),
                    parents,
                    mechanism: MechanismKind::LinearGaussian,
                    intercept: None,
                    noise_variance: None,
                    weights: None,
                    cardinality: None,
                    table: None,
                };
                match m {
                    Mechanism::LinearGaussian {
                        weights,
                        noise_variance,
                        intercept,
                    } => {
                        spec.intercept = Some(*intercept);
                        spec.noise_variance = Some(*noise_variance);
                        spec.weights = Some(weights.clone());
                    }
                    Mechanism::DiscreteCpt { cardinality, table } => {
                        spec.mechanism = MechanismKind::DiscreteCpt;
                        spec.cardinality = Some(*cardinality);
                        spec.table = Some(table.clone());
                    }
                }
                spec
            })
            .collect();
        let file = SpecFile {
            experiment: self.kind(),
            variable,
        };
        toml::to_string(&file).expect("spec structures always serialize")
    }

    pub fn from_spec_str(text: &str) -> Result<Scm> {
        let file: SpecFile = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| {
                text[..s.start.min(text.len())].lines().count().max(1)
            }),
            message: e.message().to_string(),
        })?;
        let variables: Vec<Variable> = file
            .variable
            .iter()
            .map(|v| Variable::new(v.name.clone(), v.role))
            .collect();
        let edges: Vec<(&str, &str)> = file
            .variable
            .iter()
            .flat_map(|v| v.parents.iter().map(move |p| (p.as_str(), v.name.as_str())))
            .collect();
        let dag = Dag::new(variables, edges)?;

        let mut mechanisms = BTreeMap::new();
        for v in file.variable {
            let missing = |field: &str| Error::input(format!("`{}`: missing `{field}`", v.name));
            let mechanism = match v.mechanism {
                MechanismKind::LinearGaussian => Mechanism::LinearGaussian {
                    weights: v.weights.unwrap_or_default(),
                    noise_variance: v.noise_variance.ok_or_else(|| missing("noise_variance"))?,
                    intercept: v.intercept.unwrap_or(0.0),
                },
                MechanismKind::DiscreteCpt => Mechanism::DiscreteCpt {
                    cardinality: v.cardinality.ok_or_else(|| missing("cardinality"))?,
                    table: v.table.ok_or_else(|| missing("table"))?,
                },
            };
            if mechanisms.insert(v.name.clone(), mechanism).is_some() {
                return Err(Error::input(format!("duplicate variable `{}`", v.name)));
            }
        }
        Scm::new(dag, mechanisms, file.experiment)
    }
}
