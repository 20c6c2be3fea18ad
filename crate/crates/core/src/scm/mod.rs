//! Structural causal models over a [`Dag`] and forward simulation of
//! stimulus- and response-based experiments.

mod dataset;
mod fixtures;
mod oracle;
mod spec_file;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bits, Dag, VariableRole};

pub use dataset::{format_numeric, Column, ColumnData, Dataset};
pub use fixtures::{canonical_fixture, FixtureInfo, FIXTURES};
pub use oracle::{oracle, GraphOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    StimulusBased,
    ResponseBased,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::StimulusBased => "stimulus-based",
            ExperimentKind::ResponseBased => "response-based",
        }
    }

    /// Role of the experimental condition in this kind of experiment.
    pub fn condition_role(self) -> VariableRole {
        match self {
            ExperimentKind::StimulusBased => VariableRole::Stimulus,
            ExperimentKind::ResponseBased => VariableRole::Response,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stimulus-based" | "stimulus" => Ok(ExperimentKind::StimulusBased),
            "response-based" | "response" => Ok(ExperimentKind::ResponseBased),
            other => Err(Error::input(format!("unknown experiment kind `{other}`"))),
        }
    }
}

/// How a variable is generated from its parents.
#[derive(Clone, Debug, PartialEq)]
pub enum Mechanism {
    /// `intercept + Σ weight·parent + N(0, noise_variance)`. Discrete parents
    /// enter as ±1 when binary and as their category index otherwise.
    LinearGaussian {
        weights: BTreeMap<String, f64>,
        noise_variance: f64,
        intercept: f64,
    },
    /// One probability row per joint configuration of the (discrete) parents,
    /// mixed-radix over parents in variable order with the first parent most
    /// significant.
    DiscreteCpt {
        cardinality: u32,
        table: Vec<Vec<f64>>,
    },
}

impl Mechanism {
    pub fn linear(weights: &[(&str, f64)]) -> Self {
        Mechanism::LinearGaussian {
            weights: weights.iter().map(|(k, w)| (k.to_string(), *w)).collect(),
            noise_variance: 1.0,
            intercept: 0.0,
        }
    }

    pub fn uniform(cardinality: u32) -> Self {
        Mechanism::DiscreteCpt {
            cardinality,
            table: vec![vec![1.0 / f64::from(cardinality); cardinality as usize]],
        }
    }

    fn cardinality(&self) -> Option<u32> {
        match self {
            Mechanism::DiscreteCpt { cardinality, .. } => Some(*cardinality),
            Mechanism::LinearGaussian { .. } => None,
        }
    }
}

/// A DAG with one sampling mechanism per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Scm {
    dag: Dag,
    mechanisms: Vec<Mechanism>,
    kind: ExperimentKind,
}

impl Scm {
    pub fn new(
        dag: Dag,
        mut mechanisms: BTreeMap<String, Mechanism>,
        kind: ExperimentKind,
    ) -> Result<Self> {
        let mut ordered = Vec::with_capacity(dag.len());
        for v in dag.variables() {
            let m = mechanisms
                .remove(&v.name)
                .ok_or_else(|| Error::input(format!("no mechanism for `{}`", v.name)))?;
            ordered.push(m);
        }
        if let Some(extra) = mechanisms.keys().next() {
            return Err(Error::UnknownVariable(extra.clone()));
        }
        let scm = Scm {
            dag,
            mechanisms: ordered,
            kind,
        };
        scm.validate()?;
        Ok(scm)
    }

    fn validate(&self) -> Result<()> {
        let dag = &self.dag;
        for (i, m) in self.mechanisms.iter().enumerate() {
            let name = dag.name(i);
            let parents: Vec<usize> = bits(dag.parents(i)).collect();
            match m {
                Mechanism::LinearGaussian {
                    weights,
                    noise_variance,
                    intercept,
                } => {
                    if !(*noise_variance > 0.0 && noise_variance.is_finite()) {
                        return Err(Error::input(format!(
                            "`{name}`: noise variance must be positive and finite"
                        )));
                    }
                    if !intercept.is_finite() || weights.values().any(|w| !w.is_finite()) {
                        return Err(Error::input(format!("`{name}`: non-finite coefficient")));
                    }
                    let keys: Vec<&str> = weights.keys().map(String::as_str).collect();
                    let mut expected: Vec<&str> = parents.iter().map(|&p| dag.name(p)).collect();
                    expected.sort_unstable();
                    if keys != expected {
                        return Err(Error::input(format!(
                            "`{name}`: weights {keys:?} do not match parents {expected:?}"
                        )));
                    }
                }
                Mechanism::DiscreteCpt { cardinality, table } => {
                    if *cardinality < 2 {
                        return Err(Error::input(format!(
                            "`{name}`: cardinality must be at least 2"
                        )));
                    }
                    let mut rows = 1usize;
                    for &p in &parents {
                        let card = self.mechanisms[p].cardinality().ok_or_else(|| {
                            Error::input(format!(
                                "`{name}`: discrete node has continuous parent `{}`",
                                dag.name(p)
                            ))
                        })?;
                        rows *= card as usize;
                    }
                    if table.len() != rows {
                        return Err(Error::input(format!(
                            "`{name}`: expected {rows} probability rows, found {}",
                            table.len()
                        )));
                    }
                    for row in table {
                        let sum: f64 = row.iter().sum();
                        if row.len() != *cardinality as usize
                            || row.iter().any(|&p| !(p >= 0.0))
                            || (sum - 1.0).abs() > 1e-9
                        {
                            return Err(Error::input(format!(
                                "`{name}`: each row needs {cardinality} non-negative entries summing to 1"
                            )));
                        }
                    }
                }
            }
        }

        match self.kind {
            ExperimentKind::StimulusBased => {
                let s = dag.stimulus().ok_or_else(|| {
                    Error::input("stimulus-based experiment without a stimulus variable")
                })?;
                if dag.parents(s) != 0 {
                    return Err(Error::input("a randomized stimulus cannot have parents"));
                }
            }
            ExperimentKind::ResponseBased => {
                let r = dag.response().ok_or_else(|| {
                    Error::input("response-based experiment without a response variable")
                })?;
                if bits(dag.children(r)).any(|c| dag.role(c) == VariableRole::Feature) {
                    return Err(Error::input("a response cannot cause brain-state features"));
                }
            }
        }
        Ok(())
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn kind(&self) -> ExperimentKind {
        self.kind
    }

    pub fn mechanism(&self, name: &str) -> Result<&Mechanism> {
        Ok(&self.mechanisms[self.dag.index_of(name)?])
    }

    pub fn mechanisms(&self) -> impl Iterator<Item = (&str, &Mechanism)> {
        self.dag
            .variables()
            .iter()
            .map(|v| v.name.as_str())
            .zip(&self.mechanisms)
    }

    /// Name of the experimental condition (stimulus or response).
    pub fn condition(&self) -> &str {
        let i = match self.kind {
            ExperimentKind::StimulusBased => self.dag.stimulus(),
            ExperimentKind::ResponseBased => self.dag.response(),
        };
        self.dag.name(i.expect("validated on construction"))
    }

    /// Observed brain-state features in variable order.
    pub fn features(&self) -> Vec<&str> {
        self.dag
            .variables()
            .iter()
            .filter(|v| v.role == VariableRole::Feature)
            .map(|v| v.name.as_str())
            .collect()
    }

    /// Draws `n` i.i.d. rows by forward sampling in topological order.
    ///
    /// All randomness comes from one ChaCha20 stream keyed by `seed`, consumed
    /// row by row and, within a row, variable by variable in topological
    /// order. Hidden variables are sampled and then dropped.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::input("sample size must be at least 1"));
        }
        let dag = &self.dag;
        let order = dag.topological_order().expect("acyclic by construction");
        let parents: Vec<Vec<usize>> = (0..dag.len())
            .map(|i| bits(dag.parents(i)).collect())
            .collect();
        let weights: Vec<Vec<f64>> = self
            .mechanisms
            .iter()
            .enumerate()
            .map(|(i, m)| match m {
                Mechanism::LinearGaussian { weights, .. } => {
                    parents[i].iter().map(|&p| weights[dag.name(p)]).collect()
                }
                Mechanism::DiscreteCpt { .. } => Vec::new(),
            })
            .collect();

        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut values = vec![vec![0.0f64; n]; dag.len()];
        let mut row = vec![0.0f64; dag.len()];
        for r in 0..n {
            for &v in &order {
                row[v] = match &self.mechanisms[v] {
                    Mechanism::LinearGaussian {
                        noise_variance,
                        intercept,
                        ..
                    } => {
                        let mut x = *intercept;
                        for (&p, w) in parents[v].iter().zip(&weights[v]) {
                            x += w * self.linear_code(p, row[p]);
                        }
                        let z: f64 = rng.sample(StandardNormal);
                        x + noise_variance.sqrt() * z
                    }
                    Mechanism::DiscreteCpt { table, .. } => {
                        let mut idx = 0usize;
                        for &p in &parents[v] {
                            let card = self.mechanisms[p].cardinality().unwrap_or(1) as usize;
                            idx = idx * card + row[p] as usize;
                        }
                        let u: f64 = rng.random();
                        draw_category(&table[idx], u) as f64
                    }
                };
            }
            for (v, column) in values.iter_mut().enumerate() {
                column[r] = row[v];
            }
        }

        let columns = dag
            .variables()
            .iter()
            .zip(values)
            .zip(&self.mechanisms)
            .filter(|((var, _), _)| var.role != VariableRole::Hidden)
            .map(|((var, vals), m)| Column {
                name: var.name.clone(),
                role: var.role,
                data: match m {
                    Mechanism::LinearGaussian { .. } => ColumnData::Numeric(vals),
                    Mechanism::DiscreteCpt { .. } => {
                        ColumnData::Categorical(vals.into_iter().map(|x| x as u32).collect())
                    }
                },
            })
            .collect();
        Dataset::new(columns, Some(seed))
    }

    fn linear_code(&self, parent: usize, value: f64) -> f64 {
        match self.mechanisms[parent].cardinality() {
            Some(2) => 2.0 * value - 1.0,
            _ => value,
        }
    }
}

fn draw_category(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    row.len() - 1
}
