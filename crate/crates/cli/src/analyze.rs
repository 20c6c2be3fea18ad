use std::fs::{self, File};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use neurocausal::citest::{ci_provider, CiProvider, DEFAULT_ALPHA};
use neurocausal::graph::{VariableRole, MAX_OBSERVED};
use neurocausal::interpret::{combine, interpret, Assumptions, InterpretationReport};
use neurocausal::relevance::{relevance_sets, rfe_relevance_sets, RfeParams};
use neurocausal::scm::{oracle, Dataset, ExperimentKind};

use crate::out;
use crate::simulate::load_scm;
use crate::{AnalyzeArgs, Failure};

/// Settings read from `--config`. Every field can also be given as a flag,
/// and flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub condition: Option<String>,
    pub fixture: Option<String>,
    pub spec: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub bonferroni: Option<bool>,
    pub decoder: Option<String>,
    pub permutations: Option<usize>,
    pub faithfulness: Option<bool>,
    pub sufficiency: Option<bool>,
    pub combine: Option<bool>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub text: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    Oracle {
        fixture: Option<String>,
        spec: Option<PathBuf>,
    },
    Data {
        path: PathBuf,
        alpha: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decoder {
    Ci,
    Rfe,
}

/// Fully resolved analysis settings.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    pub experiment: Option<ExperimentKind>,
    pub condition: Option<String>,
    pub mode: Mode,
    pub bonferroni: bool,
    pub decoder: Decoder,
    pub permutations: Option<usize>,
    pub faithfulness: Option<bool>,
    pub sufficiency: Option<bool>,
    pub combine: bool,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub text: Option<PathBuf>,
}

impl AnalysisConfig {
    pub fn resolve(args: &AnalyzeArgs) -> Result<Self, Failure> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
                toml::from_str::<ConfigFile>(&text)
                    .map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e.message())))?
            }
            None => ConfigFile::default(),
        };
        let experiment = args
            .experiment
            .clone()
            .or(file.experiment)
            .map(|s| s.parse::<ExperimentKind>())
            .transpose()?;
        let fixture = args.fixture.clone().or(file.fixture);
        let spec = args.spec.clone().or(file.spec);
        let data = args.data.clone().or(file.data);
        let alpha = args.alpha.or(file.alpha);
        let mode = match (fixture, spec, data) {
            (f @ Some(_), None, None) => Mode::Oracle {
                fixture: f,
                spec: None,
            },
            (None, s @ Some(_), None) => Mode::Oracle {
                fixture: None,
                spec: s,
            },
            (None, None, Some(path)) => {
                let alpha = alpha.unwrap_or(DEFAULT_ALPHA);
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Failure::Usage(format!(
                        "alpha must lie in (0, 1), got {alpha}"
                    )));
                }
                Mode::Data { path, alpha }
            }
            _ => {
                return Err(Failure::Usage(
                    "give exactly one of --fixture, --spec or --data".into(),
                ))
            }
        };
        if matches!(mode, Mode::Oracle { .. }) && alpha.is_some() {
            return Err(Failure::Usage("alpha only applies to data mode".into()));
        }
        let decoder = match args.decoder.clone().or(file.decoder).as_deref() {
            None | Some("ci") => Decoder::Ci,
            Some("rfe") => Decoder::Rfe,
            Some(other) => {
                return Err(Failure::Usage(format!(
                    "unknown decoder `{other}` (expected ci or rfe)"
                )))
            }
        };
        if decoder == Decoder::Rfe && !matches!(mode, Mode::Data { .. }) {
            return Err(Failure::Usage("the rfe decoder needs --data".into()));
        }
        Ok(AnalysisConfig {
            experiment,
            condition: args.condition.clone().or(file.condition),
            mode,
            bonferroni: args.bonferroni.or(file.bonferroni).unwrap_or(false),
            decoder,
            permutations: args.permutations.or(file.permutations),
            faithfulness: args.faithfulness.or(file.faithfulness),
            sufficiency: args.sufficiency.or(file.sufficiency),
            combine: !args.no_combine && file.combine.unwrap_or(true),
            seed: args.seed.or(file.seed),
            output: args.output.clone().or(file.output),
            text: args.text.clone().or(file.text),
        })
    }
}

/// Runs the analysis and returns the report.
pub fn run_analysis(config: &AnalysisConfig) -> Result<InterpretationReport, Failure> {
    let faithfulness = config.faithfulness.unwrap_or(true);
    match &config.mode {
        Mode::Oracle { fixture, spec } => {
            let scm = load_scm(fixture.as_deref(), spec.as_deref())?;
            if spec.is_some() {
                eprintln!(
                    "note: oracle mode uses only the graph of the spec; mechanisms are ignored"
                );
            }
            let kind = config.experiment.unwrap_or(scm.kind());
            let dag = scm.dag();
            let condition = match &config.condition {
                Some(c) => c.clone(),
                None => {
                    let idx = match kind {
                        ExperimentKind::StimulusBased => dag.stimulus(),
                        ExperimentKind::ResponseBased => dag.response(),
                    };
                    let idx = idx.ok_or_else(|| {
                        Failure::Usage(format!("graph has no {} variable", kind.condition_role()))
                    })?;
                    dag.name(idx).to_string()
                }
            };
            let has_hidden = dag
                .variables()
                .iter()
                .any(|v| v.role == VariableRole::Hidden);
            let sufficiency = match config.sufficiency {
                Some(s) => s,
                None => {
                    if has_hidden {
                        eprintln!(
                            "note: the graph has latent variables; assuming causal insufficiency"
                        );
                    }
                    !has_hidden
                }
            };
            let assumptions = Assumptions {
                faithfulness,
                sufficiency,
            };
            let ci = oracle(&scm);
            let features = scm.features();
            let sets = relevance_sets(&ci, &condition, &features)?;
            finish(kind, &sets, &sets, &ci, assumptions, config.combine)
        }
        Mode::Data { path, alpha } => {
            let file = File::open(path).map_err(|e| Failure::io(path, e))?;
            let data = Dataset::read_csv(std::io::BufReader::new(file)).map_err(|e| match e {
                neurocausal::Error::Io(e) => Failure::io(path, e),
                other => Failure::Usage(format!("{}: {other}", path.display())),
            })?;
            let data = match config.seed {
                Some(seed) => data.with_seed(Some(seed)),
                None => data,
            };
            let kind = match config.experiment.or(data.experiment_kind()) {
                Some(k) => k,
                None => {
                    return Err(Failure::Usage(
                        "cannot infer the experiment kind; pass --experiment".into(),
                    ))
                }
            };
            let condition = match &config.condition {
                Some(c) => c.clone(),
                None => data.condition(kind)?.name.clone(),
            };
            let features: Vec<String> = data.features().into_iter().map(String::from).collect();
            let feature_refs: Vec<&str> = features.iter().map(String::as_str).collect();
            let assumptions = Assumptions {
                faithfulness,
                sufficiency: config.sufficiency.unwrap_or(true),
            };
            let mut ci = ci_provider(data.clone(), *alpha)?;
            if config.bonferroni {
                ci = ci.with_bonferroni(2 * features.len());
            }
            let enc = relevance_sets(&ci, &condition, &feature_refs)?;
            let dec = match config.decoder {
                Decoder::Ci => enc.clone(),
                Decoder::Rfe => {
                    let mut params = RfeParams {
                        seed: config.seed,
                        ..RfeParams::default()
                    };
                    if let Some(p) = config.permutations {
                        params.permutations = p;
                    }
                    rfe_relevance_sets(&data, &condition, &params)?
                }
            };
            finish(kind, &enc, &dec, &ci, assumptions, config.combine)
        }
    }
}

fn finish(
    kind: ExperimentKind,
    enc: &neurocausal::relevance::RelevanceSets,
    dec: &neurocausal::relevance::RelevanceSets,
    ci: &dyn CiProvider,
    assumptions: Assumptions,
    want_combine: bool,
) -> Result<InterpretationReport, Failure> {
    let observed = enc.features.len() + 1;
    if want_combine && observed > MAX_OBSERVED {
        eprintln!("note: {observed} variables exceed the structure-search cap of {MAX_OBSERVED}; skipping it");
    }
    if want_combine && observed <= MAX_OBSERVED && assumptions.faithfulness {
        Ok(combine(kind, enc, dec, ci, assumptions)?)
    } else {
        Ok(interpret(kind, enc, dec, assumptions)?)
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let config = AnalysisConfig::resolve(args)?;
    let report = run_analysis(&config)?;
    let json = report.to_json_string();
    let text = report.render_text();
    match &config.output {
        Some(path) => {
            write(path, &json)?;
            out!("{text}");
        }
        None => out!("{json}"),
    }
    if let Some(path) = &config.text {
        write(path, &text)?;
    }
    Ok(())
}
