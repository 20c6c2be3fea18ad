//! Causal claims from relevance sets.
//!
//! Each (experiment kind, model direction) pair is one of four model types,
//! labelled by rule ids A to D. A single model yields per-feature claims;
//! [`combine`] adds the structures consistent with all CI statements and
//! sharpens the claims that hold across every one of them.

mod combine;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relevance::{ModelDirection, Partition, RelevanceSets};
use crate::scm::ExperimentKind;

pub use combine::{combine, interpret, Assumptions};
pub use report::{InterpretationReport, Membership, ReportProvenance, Structure, REPORT_SCHEMA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelType {
    CausalEncoding,
    AntiCausalDecoding,
    AntiCausalEncoding,
    CausalDecoding,
}

impl ModelType {
    pub fn of(kind: ExperimentKind, direction: ModelDirection) -> Self {
        match (kind, direction) {
            (ExperimentKind::StimulusBased, ModelDirection::Encoding) => ModelType::CausalEncoding,
            (ExperimentKind::StimulusBased, ModelDirection::Decoding) => {
                ModelType::AntiCausalDecoding
            }
            (ExperimentKind::ResponseBased, ModelDirection::Encoding) => {
                ModelType::AntiCausalEncoding
            }
            (ExperimentKind::ResponseBased, ModelDirection::Decoding) => ModelType::CausalDecoding,
        }
    }

    pub fn rule(self) -> &'static str {
        match self {
            ModelType::CausalEncoding => "A",
            ModelType::AntiCausalDecoding => "B",
            ModelType::AntiCausalEncoding => "C",
            ModelType::CausalDecoding => "D",
        }
    }

    /// The conditional distribution the model estimates.
    pub fn distribution(self) -> &'static str {
        match self {
            ModelType::CausalEncoding => "p(X|S)",
            ModelType::AntiCausalDecoding => "p(S|X)",
            ModelType::AntiCausalEncoding => "p(X|R)",
            ModelType::CausalDecoding => "p(R|X)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Claim {
    GenuineEffect,
    PotentialEffect,
    NotEffect,
    DirectCause,
    PotentialCause,
    NotCause,
    NoClaim,
}

impl Claim {
    pub fn is_about_effects(self) -> bool {
        matches!(
            self,
            Claim::GenuineEffect | Claim::PotentialEffect | Claim::NotEffect
        )
    }

    pub fn is_about_causes(self) -> bool {
        matches!(
            self,
            Claim::DirectCause | Claim::PotentialCause | Claim::NotCause
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Claim::GenuineEffect => "GenuineEffect",
            Claim::PotentialEffect => "PotentialEffect",
            Claim::NotEffect => "NotEffect",
            Claim::DirectCause => "DirectCause",
            Claim::PotentialCause => "PotentialCause",
            Claim::NotCause => "NotCause",
            Claim::NoClaim => "NoClaim",
        }
    }
}

/// Which analysis produced a claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimSource {
    Encoding,
    Decoding,
    Combined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureClaim {
    pub feature: String,
    pub source: ClaimSource,
    pub claim: Claim,
    pub rule: String,
    pub justification: String,
}

fn partition(sets: &RelevanceSets, direction: ModelDirection) -> Result<&Partition> {
    let p = match direction {
        ModelDirection::Encoding => sets.encoding.as_ref(),
        ModelDirection::Decoding => sets.decoding.as_ref(),
    };
    p.ok_or_else(|| {
        Error::input(format!(
            "relevance sets carry no {} partition",
            if direction == ModelDirection::Encoding {
                "encoding"
            } else {
                "decoding"
            }
        ))
    })
}

fn claim_for(
    kind: ExperimentKind,
    direction: ModelDirection,
    cond: &str,
    feature: &str,
    relevant: bool,
) -> FeatureClaim {
    let model = ModelType::of(kind, direction);
    let rule = model.rule();
    let dist = model.distribution();
    let (claim, text) = match (model, relevant) {
        (ModelType::CausalEncoding, true) => (
            Claim::GenuineEffect,
            format!("{feature} depends on the randomized {cond}, so {cond} causes {feature}"),
        ),
        (ModelType::CausalEncoding, false) => (
            Claim::NotEffect,
            format!("{feature} is independent of the randomized {cond}"),
        ),
        (ModelType::AntiCausalDecoding, true) => (
            Claim::PotentialEffect,
            format!("{feature} carries information about {cond} given the other features; it may also be a non-effect linked through a collider"),
        ),
        (ModelType::AntiCausalDecoding, false) => (
            Claim::NoClaim,
            format!("{feature} adds nothing given the other features; it may still be an effect of {cond} mediated by them"),
        ),
        (ModelType::AntiCausalEncoding, true) => (
            Claim::PotentialCause,
            format!("{feature} depends on {cond}; the dependence may come from a common cause"),
        ),
        (ModelType::AntiCausalEncoding, false) => (
            Claim::NotCause,
            format!("{feature} is independent of {cond}, so it does not cause {cond}"),
        ),
        (ModelType::CausalDecoding, true) => (
            Claim::PotentialCause,
            format!("{feature} predicts {cond} given the other features; a hidden common cause could produce the same pattern"),
        ),
        (ModelType::CausalDecoding, false) => (
            Claim::NoClaim,
            format!("{feature} adds nothing given the other features; it may still cause {cond} through them"),
        ),
    };
    FeatureClaim {
        feature: feature.to_string(),
        source: match direction {
            ModelDirection::Encoding => ClaimSource::Encoding,
            ModelDirection::Decoding => ClaimSource::Decoding,
        },
        claim,
        rule: rule.to_string(),
        justification: format!("{rule} ({dist}): {text}"),
    }
}

fn classify(
    kind: ExperimentKind,
    sets: &RelevanceSets,
    direction: ModelDirection,
) -> Result<Vec<FeatureClaim>> {
    let part = partition(sets, direction)?;
    Ok(sets
        .features
        .iter()
        .map(|f| claim_for(kind, direction, &sets.condition, f, part.is_relevant(f)))
        .collect())
}

/// Claims from the encoding partition, one per feature in feature order.
pub fn classify_encoding(kind: ExperimentKind, sets: &RelevanceSets) -> Result<Vec<FeatureClaim>> {
    classify(kind, sets, ModelDirection::Encoding)
}

/// Claims from the decoding partition. Irrelevant features get
/// [`Claim::NoClaim`], never a negative claim.
pub fn classify_decoding(kind: ExperimentKind, sets: &RelevanceSets) -> Result<Vec<FeatureClaim>> {
    classify(kind, sets, ModelDirection::Decoding)
}
