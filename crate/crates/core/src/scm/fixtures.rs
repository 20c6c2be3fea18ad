//! Canonical counterexample and deduction scenarios.
//!
//! Every fixture uses unit coefficients, unit noise and zero intercepts, so
//! no two paths can cancel. Stimuli are uniform binary and enter their
//! children as ±1.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Dag, Variable};

use super::{ExperimentKind, Mechanism, Scm};

#[derive(Clone, Copy, Debug)]
pub struct FixtureInfo {
    pub name: &'static str,
    pub scenario: &'static str,
    pub kind: ExperimentKind,
}

pub const FIXTURES: [FixtureInfo; 7] = [
    FixtureInfo {
        name: "stim-chain",
        scenario: "S -> X1 -> X2: decoding drops a genuine effect",
        kind: ExperimentKind::StimulusBased,
    },
    FixtureInfo {
        name: "stim-collider",
        scenario: "S -> X1 <- X2: decoding flags a non-effect",
        kind: ExperimentKind::StimulusBased,
    },
    FixtureInfo {
        name: "resp-fork",
        scenario: "X2 <- X1 -> R: encoding flags a non-cause",
        kind: ExperimentKind::ResponseBased,
    },
    FixtureInfo {
        name: "resp-chain",
        scenario: "X2 -> X1 -> R: decoding drops a genuine cause",
        kind: ExperimentKind::ResponseBased,
    },
    FixtureInfo {
        name: "resp-hidden-fig1",
        scenario: "H -> {X1, X2, R}, H latent: decoding flags two non-causes",
        kind: ExperimentKind::ResponseBased,
    },
    FixtureInfo {
        name: "stim-sec41",
        scenario: "encoding + decoding identify S -> X1 <- X2",
        kind: ExperimentKind::StimulusBased,
    },
    FixtureInfo {
        name: "resp-sec42",
        scenario: "encoding + decoding identify X1 -> R, X2 ambiguous",
        kind: ExperimentKind::ResponseBased,
    },
];

pub fn canonical_fixture(name: &str) -> Result<Scm> {
    match name {
        "stim-chain" => stimulus_scm(&[("S", "X1"), ("X1", "X2")]),
        "stim-collider" | "stim-sec41" => stimulus_scm(&[("S", "X1"), ("X2", "X1")]),
        "resp-fork" | "resp-sec42" => response_scm(&[("X1", "X2"), ("X1", "R")], false),
        "resp-chain" => response_scm(&[("X2", "X1"), ("X1", "R")], false),
        "resp-hidden-fig1" => response_scm(&[("H", "X1"), ("H", "X2"), ("H", "R")], true),
        other => {
            let known: Vec<&str> = FIXTURES.iter().map(|f| f.name).collect();
            Err(Error::input(format!(
                "unknown fixture `{other}` (known: {})",
                known.join(", ")
            )))
        }
    }
}

fn stimulus_scm(edges: &[(&str, &str)]) -> Result<Scm> {
    let vars = vec![
        Variable::stimulus("S"),
        Variable::feature("X1"),
        Variable::feature("X2"),
    ];
    let dag = Dag::new(vars, edges.iter().copied())?;
    let mut mechanisms = linear_mechanisms(&dag, edges);
    mechanisms.insert("S".into(), Mechanism::uniform(2));
    Scm::new(dag, mechanisms, ExperimentKind::StimulusBased)
}

fn response_scm(edges: &[(&str, &str)], latent: bool) -> Result<Scm> {
    let mut vars = Vec::new();
    if latent {
        vars.push(Variable::hidden("H"));
    }
    vars.extend([
        Variable::feature("X1"),
        Variable::feature("X2"),
        Variable::response("R"),
    ]);
    let dag = Dag::new(vars, edges.iter().copied())?;
    let mechanisms = linear_mechanisms(&dag, edges);
    Scm::new(dag, mechanisms, ExperimentKind::ResponseBased)
}

fn linear_mechanisms(dag: &Dag, edges: &[(&str, &str)]) -> BTreeMap<String, Mechanism> {
    dag.variables()
        .iter()
        .map(|v| {
            let parents: Vec<(&str, f64)> = edges
                .iter()
                .filter(|(_, c)| *c == v.name)
                .map(|(p, _)| (*p, 1.0))
                .collect();
            (v.name.clone(), Mechanism::linear(&parents))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VariableRole;

    #[test]
    fn every_listed_fixture_builds() {
        for info in FIXTURES {
            let scm = canonical_fixture(info.name).unwrap();
            assert_eq!(scm.kind(), info.kind, "{}", info.name);
        }
        assert!(canonical_fixture("stim-fork").is_err());
    }

    #[test]
    fn fixture_graphs() {
        let chain = canonical_fixture("stim-chain").unwrap();
        assert_eq!(chain.dag().to_string(), "S->X1, X1->X2");
        assert_eq!(chain.kind(), ExperimentKind::StimulusBased);

        let latent = canonical_fixture("resp-hidden-fig1").unwrap();
        assert_eq!(latent.dag().to_string(), "H->X1, H->X2, H->R");
        assert_eq!(latent.dag().role(0), VariableRole::Hidden);

        let fork = canonical_fixture("resp-fork").unwrap();
        assert_eq!(fork.dag().to_string(), "X1->X2, X1->R");
        assert_eq!(fork.condition(), "R");
        assert_eq!(fork.features(), vec!["X1", "X2"]);
    }

    #[test]
    fn hidden_column_is_dropped() {
        let data = canonical_fixture("resp-hidden-fig1")
            .unwrap()
            .sample(10, 1)
            .unwrap();
        assert_eq!(data.column_names(), vec!["X1", "X2", "R"]);
    }
}
