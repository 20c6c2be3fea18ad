use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::citest::{all_statements, CiProvider};
use crate::error::{Error, Result};
use crate::graph::{
    consistent_structures, least_violating, shared_edges, Dag, StructuralConstraint, Variable,
    MAX_OBSERVED,
};
use crate::relevance::RelevanceSets;
use crate::scm::ExperimentKind;

use super::report::{InterpretationReport, Structure};
use super::{classify_decoding, classify_encoding, Claim, ClaimSource, FeatureClaim};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assumptions {
    pub faithfulness: bool,
    pub sufficiency: bool,
}

impl Default for Assumptions {
    fn default() -> Self {
        Assumptions {
            faithfulness: true,
            sufficiency: true,
        }
    }
}

fn check_pair(enc: &RelevanceSets, dec: &RelevanceSets) -> Result<()> {
    if enc.condition != dec.condition {
        return Err(Error::input(format!(
            "encoding sets use condition `{}` but decoding sets use `{}`",
            enc.condition, dec.condition
        )));
    }
    let a: BTreeSet<&String> = enc.features.iter().collect();
    let b: BTreeSet<&String> = dec.features.iter().collect();
    if a != b {
        return Err(Error::input(
            "encoding and decoding sets cover different features",
        ));
    }
    Ok(())
}

/// Per-model claims without structure search.
pub fn interpret(
    kind: ExperimentKind,
    enc: &RelevanceSets,
    dec: &RelevanceSets,
    assumptions: Assumptions,
) -> Result<InterpretationReport> {
    check_pair(enc, dec)?;
    let mut claims = classify_encoding(kind, enc)?;
    claims.extend(classify_decoding(kind, dec)?);
    Ok(InterpretationReport::assemble(
        kind,
        enc,
        dec,
        assumptions,
        claims,
        None,
    ))
}

/// Per-model claims plus every structure consistent with the provider's CI
/// statements over the condition and features, and the claims that follow
/// from those structures.
///
/// Stimulus experiments constrain the stimulus to be a root; response
/// experiments forbid edges from the response into features. Without
/// sufficiency one latent common cause is allowed. An empty consistent set is
/// reported as [`Error::Faithfulness`] with the statements violated by the
/// closest structure.
pub fn combine(
    kind: ExperimentKind,
    enc: &RelevanceSets,
    dec: &RelevanceSets,
    ci: &dyn CiProvider,
    assumptions: Assumptions,
) -> Result<InterpretationReport> {
    if !assumptions.faithfulness {
        return Err(Error::input(
            "structure search requires the faithfulness assumption",
        ));
    }
    check_pair(enc, dec)?;
    let cond = enc.condition.as_str();
    let wanted: BTreeSet<&str> = enc
        .features
        .iter()
        .map(String::as_str)
        .chain([cond])
        .collect();
    let available = ci.variables();
    let names: Vec<&str> = available
        .iter()
        .map(String::as_str)
        .filter(|n| wanted.contains(n))
        .collect();
    if let Some(missing) = wanted.iter().find(|w| !names.contains(w)) {
        return Err(Error::UnknownVariable(missing.to_string()));
    }
    if names.len() > MAX_OBSERVED {
        return Err(Error::Capacity {
            observed: names.len(),
            cap: MAX_OBSERVED,
        });
    }
    let variables: Vec<Variable> = names
        .iter()
        .map(|&n| {
            if n == cond {
                Variable::new(n, kind.condition_role())
            } else {
                Variable::feature(n)
            }
        })
        .collect();
    let statements = all_statements(ci, &names)?;
    let mut constraints = vec![match kind {
        ExperimentKind::StimulusBased => StructuralConstraint::RandomizedRoot(cond.to_string()),
        ExperimentKind::ResponseBased => {
            StructuralConstraint::NoOutgoingToFeatures(cond.to_string())
        }
    }];
    constraints.push(if assumptions.sufficiency {
        StructuralConstraint::CausalSufficiency
    } else {
        StructuralConstraint::MaxHidden(1)
    });

    let dags = consistent_structures(&variables, &statements, &constraints)?;
    if dags.is_empty() {
        return Err(Error::Faithfulness {
            violated: least_violating(&variables, &statements, &constraints)?,
        });
    }

    let mut claims = classify_encoding(kind, enc)?;
    let encoding_claims = claims.clone();
    claims.extend(classify_decoding(kind, dec)?);
    for (feature, single) in enc.features.iter().zip(&encoding_claims) {
        let c = match kind {
            ExperimentKind::StimulusBased => effect_claim(&dags, cond, feature, single),
            ExperimentKind::ResponseBased => cause_claim(&dags, cond, feature, single),
        };
        claims.push(c);
    }

    let shared = shared_edges(&dags)?;
    let structures = dags.iter().map(Structure::from_dag).collect();
    let mut report =
        InterpretationReport::assemble(kind, enc, dec, assumptions, claims, Some(structures));
    report.shared_edges = Some(shared.iter().map(|(p, c)| format!("{p} -> {c}")).collect());
    Ok(report)
}

fn count(dags: &[Dag], test: impl Fn(&Dag) -> bool) -> usize {
    dags.iter().filter(|d| test(d)).count()
}

fn idx(dag: &Dag, name: &str) -> usize {
    dag.index_of(name)
        .expect("structures range over the queried variables")
}

fn combined(feature: &str, claim: Claim, rule: &str, text: String) -> FeatureClaim {
    FeatureClaim {
        feature: feature.to_string(),
        source: ClaimSource::Combined,
        claim,
        rule: rule.to_string(),
        justification: format!("{rule}: {text}"),
    }
}

fn effect_claim(dags: &[Dag], s: &str, x: &str, single: &FeatureClaim) -> FeatureClaim {
    let total = dags.len();
    let with_path = count(dags, |d| d.has_directed_path(idx(d, s), idx(d, x)));
    let with_edge = count(dags, |d| d.has_edge(idx(d, s), idx(d, x)));
    let rule = "A+B";
    if with_path == total {
        let how = if with_edge == total {
            "a direct edge"
        } else {
            "a directed path"
        };
        combined(
            x,
            Claim::GenuineEffect,
            rule,
            format!("all {total} consistent structures have {how} from {s} to {x}"),
        )
    } else if with_path == 0 {
        combined(
            x,
            Claim::NotEffect,
            rule,
            format!(
                "none of the {total} consistent structures has a directed path from {s} to {x}"
            ),
        )
    } else {
        combined(
            x,
            single.claim,
            rule,
            format!("ambiguous: {with_path} of {total} consistent structures have a directed path from {s} to {x}"),
        )
    }
}

fn cause_claim(dags: &[Dag], r: &str, x: &str, single: &FeatureClaim) -> FeatureClaim {
    let total = dags.len();
    let with_edge = count(dags, |d| d.has_edge(idx(d, x), idx(d, r)));
    let with_path = count(dags, |d| d.has_directed_path(idx(d, x), idx(d, r)));
    let rule = "C+D";
    if with_edge == total {
        combined(
            x,
            Claim::DirectCause,
            rule,
            format!("all {total} consistent structures have the edge {x} -> {r}"),
        )
    } else if with_path == 0 {
        combined(
            x,
            Claim::NotCause,
            rule,
            format!(
                "none of the {total} consistent structures has a directed path from {x} to {r}"
            ),
        )
    } else {
        let claim = if single.claim == Claim::NotCause {
            Claim::NotCause
        } else {
            Claim::PotentialCause
        };
        combined(
            x,
            claim,
            rule,
            format!(
                "ambiguous: {with_path} of {total} consistent structures have a directed path from {x} to {r}, {with_edge} a direct edge"
            ),
        )
    }
}
