use std::collections::BTreeSet;

use neurocausal::graph::VariableRole;
use neurocausal::interpret::{combine, Assumptions, Claim, ClaimSource, InterpretationReport};
use neurocausal::relevance::relevance_sets;
use neurocausal::scm::{canonical_fixture, oracle, FIXTURES};

use crate::Failure;
use crate::{out, outln};

struct Expected {
    fixture: &'static str,
    encoding: &'static [&'static str],
    decoding: &'static [&'static str],
    combined: &'static [(&'static str, Claim)],
    structures: Option<usize>,
    shared_edges: Option<&'static [&'static str]>,
    note: &'static str,
}

const EXPECTED: [Expected; 7] = [
    Expected {
        fixture: "stim-chain",
        encoding: &["X1", "X2"],
        decoding: &["X1"],
        combined: &[("X1", Claim::GenuineEffect), ("X2", Claim::GenuineEffect)],
        structures: None,
        shared_edges: None,
        note: "X2 is a genuine effect missed by decoding",
    },
    Expected {
        fixture: "stim-collider",
        encoding: &["X1"],
        decoding: &["X1", "X2"],
        combined: &[("X1", Claim::GenuineEffect), ("X2", Claim::NotEffect)],
        structures: Some(1),
        shared_edges: None,
        note: "X2 not a genuine effect",
    },
    Expected {
        fixture: "resp-fork",
        encoding: &["X1", "X2"],
        decoding: &["X1"],
        combined: &[("X1", Claim::DirectCause), ("X2", Claim::PotentialCause)],
        structures: Some(2),
        shared_edges: None,
        note: "X2 flagged by encoding but not a cause",
    },
    Expected {
        fixture: "resp-chain",
        encoding: &["X1", "X2"],
        decoding: &["X1"],
        combined: &[("X1", Claim::DirectCause), ("X2", Claim::PotentialCause)],
        structures: Some(2),
        shared_edges: None,
        note: "genuine cause missed",
    },
    Expected {
        fixture: "resp-hidden-fig1",
        encoding: &["X1", "X2"],
        decoding: &["X1", "X2"],
        combined: &[("X1", Claim::PotentialCause), ("X2", Claim::PotentialCause)],
        structures: None,
        shared_edges: None,
        note: "X1 and X2 flagged by decoding but not causes",
    },
    Expected {
        fixture: "stim-sec41",
        encoding: &["X1"],
        decoding: &["X1", "X2"],
        combined: &[("X1", Claim::GenuineEffect), ("X2", Claim::NotEffect)],
        structures: Some(1),
        shared_edges: Some(&["S -> X1", "X2 -> X1"]),
        note: "unique structure: X2 causes X1",
    },
    Expected {
        fixture: "resp-sec42",
        encoding: &["X1", "X2"],
        decoding: &["X1"],
        combined: &[("X1", Claim::DirectCause), ("X2", Claim::PotentialCause)],
        structures: Some(2),
        shared_edges: Some(&["X1 -> R"]),
        note: "X1 direct cause, X2 ambiguous",
    },
];

#[derive(Clone, Debug)]
pub struct DemoRow {
    pub fixture: String,
    pub scenario: String,
    pub encoding: BTreeSet<String>,
    pub decoding: BTreeSet<String>,
    pub claims: Vec<(String, Claim)>,
    pub structures: usize,
    pub note: String,
    pub report: InterpretationReport,
    pub deviations: Vec<String>,
}

impl DemoRow {
    pub fn ok(&self) -> bool {
        self.deviations.is_empty()
    }
}

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Runs every canonical fixture in oracle mode and compares the outcome with
/// the expected relevance sets, claims and structures.
pub fn demo_rows() -> Result<Vec<DemoRow>, Failure> {
    let mut rows = Vec::new();
    for info in FIXTURES {
        let expected = EXPECTED
            .iter()
            .find(|e| e.fixture == info.name)
            .expect("every fixture has expectations");
        let scm = canonical_fixture(info.name)?;
        let ci = oracle(&scm);
        let sets = relevance_sets(&ci, scm.condition(), &scm.features())?;
        let hidden = scm
            .dag()
            .variables()
            .iter()
            .any(|v| v.role == VariableRole::Hidden);
        let assumptions = Assumptions {
            faithfulness: true,
            sufficiency: !hidden,
        };
        let report = combine(scm.kind(), &sets, &sets, &ci, assumptions)?;

        let encoding = sets
            .encoding
            .as_ref()
            .map(|p| p.relevant.clone())
            .unwrap_or_default();
        let decoding = sets
            .decoding
            .as_ref()
            .map(|p| p.relevant.clone())
            .unwrap_or_default();
        let claims: Vec<(String, Claim)> = report
            .claims_from(ClaimSource::Combined)
            .into_iter()
            .map(|c| (c.feature.clone(), c.claim))
            .collect();
        let structures = report.structures.as_ref().map_or(0, Vec::len);

        let mut deviations = Vec::new();
        if encoding != set(expected.encoding) {
            deviations.push(format!(
                "encoding set {encoding:?}, expected {:?}",
                expected.encoding
            ));
        }
        if decoding != set(expected.decoding) {
            deviations.push(format!(
                "decoding set {decoding:?}, expected {:?}",
                expected.decoding
            ));
        }
        let want: Vec<(String, Claim)> = expected
            .combined
            .iter()
            .map(|(f, c)| (f.to_string(), *c))
            .collect();
        if claims != want {
            deviations.push(format!("claims {claims:?}, expected {want:?}"));
        }
        if let Some(n) = expected.structures {
            if structures != n {
                deviations.push(format!("{structures} structures, expected {n}"));
            }
        }
        if let Some(shared) = expected.shared_edges {
            let got = report.shared_edges.clone().unwrap_or_default();
            if got != shared.iter().map(|s| s.to_string()).collect::<Vec<_>>() {
                deviations.push(format!("shared edges {got:?}, expected {shared:?}"));
            }
        }
        rows.push(DemoRow {
            fixture: info.name.to_string(),
            scenario: info.scenario.to_string(),
            encoding,
            decoding,
            claims,
            structures,
            note: expected.note.to_string(),
            report,
            deviations,
        });
    }
    Ok(rows)
}

fn braces(s: &BTreeSet<String>) -> String {
    format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(","))
}

pub fn render_table(rows: &[DemoRow]) -> String {
    let header = [
        "fixture",
        "scenario",
        "enc",
        "dec",
        "combined claims",
        "structures",
        "note",
        "status",
    ];
    let cells: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            [
                r.fixture.clone(),
                r.scenario.clone(),
                braces(&r.encoding),
                braces(&r.decoding),
                r.claims
                    .iter()
                    .map(|(f, c)| format!("{f}: {}", c.as_str()))
                    .collect::<Vec<_>>()
                    .join(", "),
                r.structures.to_string(),
                r.note.clone(),
                if r.ok() {
                    "ok".into()
                } else {
                    "DEVIATION".into()
                },
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |items: Vec<&str>| {
        items
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join(" | ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(
        &widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("-+-"),
    );
    out.push('\n');
    for row in &cells {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub fn cmd_demo() -> Result<(), Failure> {
    let rows = demo_rows()?;
    out!("{}", render_table(&rows));
    let failed: Vec<&DemoRow> = rows.iter().filter(|r| !r.ok()).collect();
    if failed.is_empty() {
        outln!("all {} fixtures match", rows.len());
        Ok(())
    } else {
        for r in &failed {
            for d in &r.deviations {
                eprintln!("{}: {d}", r.fixture);
            }
        }
        Err(Failure::Analysis(format!(
            "{} fixture(s) deviate",
            failed.len()
        )))
    }
}
