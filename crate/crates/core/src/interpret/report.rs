use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{Dag, VariableRole};
use crate::relevance::{ModelDirection, Provenance, QueryRecord, RelevanceSets};
use crate::scm::ExperimentKind;

use super::{Assumptions, ClaimSource, FeatureClaim};

/// JSON schema for serialized [`InterpretationReport`]s.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub encoding: Provenance,
    pub decoding: Provenance,
    pub alpha: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub encoding: Option<bool>,
    pub decoding: Option<bool>,
}

/// One consistent structure as an edge list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub edges: Vec<String>,
    pub hidden: Vec<String>,
}

impl Structure {
    pub fn from_dag(dag: &Dag) -> Self {
        Structure {
            edges: dag
                .edge_names()
                .into_iter()
                .map(|(p, c)| format!("{p} -> {c}"))
                .collect(),
            hidden: dag
                .variables()
                .iter()
                .filter(|v| v.role == VariableRole::Hidden)
                .map(|v| v.name.clone())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpretationReport {
    pub experiment: ExperimentKind,
    pub condition: String,
    pub features: Vec<String>,
    pub assumptions: Assumptions,
    pub provenance: ReportProvenance,
    pub relevance: BTreeMap<String, Membership>,
    pub claims: Vec<FeatureClaim>,
    pub structures: Option<Vec<Structure>>,
    pub shared_edges: Option<Vec<String>>,
    pub queries: Vec<QueryRecord>,
}

impl InterpretationReport {
    pub(crate) fn assemble(
        kind: ExperimentKind,
        enc: &RelevanceSets,
        dec: &RelevanceSets,
        assumptions: Assumptions,
        claims: Vec<FeatureClaim>,
        structures: Option<Vec<Structure>>,
    ) -> Self {
        let relevance = enc
            .features
            .iter()
            .map(|f| {
                (
                    f.clone(),
                    Membership {
                        encoding: enc.encoding.as_ref().map(|p| p.is_relevant(f)),
                        decoding: dec.decoding.as_ref().map(|p| p.is_relevant(f)),
                    },
                )
            })
            .collect();
        let queries = enc
            .queries
            .iter()
            .filter(|q| q.model == ModelDirection::Encoding)
            .chain(
                dec.queries
                    .iter()
                    .filter(|q| q.model == ModelDirection::Decoding),
            )
            .cloned()
            .collect();
        InterpretationReport {
            experiment: kind,
            condition: enc.condition.clone(),
            features: enc.features.clone(),
            assumptions,
            provenance: ReportProvenance {
                encoding: enc.provenance.clone(),
                decoding: dec.provenance.clone(),
                alpha: enc.provenance.alpha().or(dec.provenance.alpha()),
            },
            relevance,
            claims,
            structures,
            shared_edges: None,
            queries,
        }
    }

    /// Claims from one analysis source, in feature order.
    pub fn claims_from(&self, source: ClaimSource) -> Vec<&FeatureClaim> {
        self.claims.iter().filter(|c| c.source == source).collect()
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Plain-text rendering with one line per JSON entry.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let flag = |m: Option<bool>| match m {
            Some(true) => "relevant",
            Some(false) => "irrelevant",
            None => "-",
        };
        let source = |p: &Provenance| match p {
            Provenance::Oracle => "oracle".to_string(),
            Provenance::Statistical { alpha, bonferroni } => match bonferroni {
                Some(m) => format!("statistical (alpha {alpha}, bonferroni {m})"),
                None => format!("statistical (alpha {alpha})"),
            },
            Provenance::Rfe(p) => format!(
                "rfe (level {}, {} permutations, {} folds, ridge {})",
                p.level, p.permutations, p.folds, p.regularization
            ),
        };
        let _ = writeln!(
            out,
            "experiment: {} (condition {})",
            self.experiment, self.condition
        );
        let _ = writeln!(
            out,
            "assumptions: faithfulness={} sufficiency={}",
            self.assumptions.faithfulness, self.assumptions.sufficiency
        );
        let _ = writeln!(
            out,
            "encoding provenance: {}",
            source(&self.provenance.encoding)
        );
        let _ = writeln!(
            out,
            "decoding provenance: {}",
            source(&self.provenance.decoding)
        );
        let _ = writeln!(out, "relevance:");
        for (f, m) in &self.relevance {
            let _ = writeln!(
                out,
                "  {f}: encoding {}, decoding {}",
                flag(m.encoding),
                flag(m.decoding)
            );
        }
        let _ = writeln!(out, "claims:");
        for c in &self.claims {
            let src = match c.source {
                ClaimSource::Encoding => "encoding",
                ClaimSource::Decoding => "decoding",
                ClaimSource::Combined => "combined",
            };
            let _ = writeln!(
                out,
                "  [{src}] {}: {}  {}",
                c.feature,
                c.claim.as_str(),
                c.justification
            );
        }
        if let Some(structures) = &self.structures {
            let _ = writeln!(out, "structures ({}):", structures.len());
            for s in structures {
                let edges = if s.edges.is_empty() {
                    "(no edges)".to_string()
                } else {
                    s.edges.join(", ")
                };
                if s.hidden.is_empty() {
                    let _ = writeln!(out, "  {edges}");
                } else {
                    let _ = writeln!(out, "  {edges}  (latent {})", s.hidden.join(", "));
                }
            }
        }
        if let Some(shared) = &self.shared_edges {
            let shared = if shared.is_empty() {
                "(none)".to_string()
            } else {
                shared.join(", ")
            };
            let _ = writeln!(out, "shared edges: {shared}");
        }
        if !self.queries.is_empty() {
            let _ = writeln!(out, "queries:");
            for q in &self.queries {
                match q.p_value {
                    Some(p) => {
                        let _ = writeln!(out, "  {}  p={p:.6e}", q.statement);
                    }
                    None => {
                        let _ = writeln!(out, "  {}", q.statement);
                    }
                }
            }
        }
        out
    }
}
