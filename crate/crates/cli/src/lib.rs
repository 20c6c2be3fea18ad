//! Command-line front end for the `neurocausal` library.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
//! 3 analysis-level error (faithfulness violation, enumeration cap,
//! degenerate data, failed self-check).

pub mod analyze;
pub mod calibrate;
pub mod demo;
pub mod enumerate;
mod failure;
pub mod simulate;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use failure::Failure;

/// Writes to standard output, ignoring a closed pipe.
pub fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

macro_rules! outln {
    ($($t:tt)*) => { $crate::emit(&format!("{}\n", format_args!($($t)*))) };
}

macro_rules! out {
    ($($t:tt)*) => { $crate::emit(&format!($($t)*)) };
}

pub(crate) use {out, outln};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_ANALYSIS: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "neurocausal",
    version,
    about = "Causal interpretation of encoding and decoding models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a dataset from a canonical fixture or an SCM spec file.
    Simulate(SimulateArgs),
    /// Compute relevance sets and causal claims.
    Analyze(AnalyzeArgs),
    /// Run every canonical fixture in oracle mode and check the results.
    Demo,
    /// List the structures consistent with a set of CI statements.
    Enumerate(EnumerateArgs),
    /// Estimate the type-I error of a CI test under the null.
    Calibrate(CalibrateArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Canonical fixture name.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub fixture: Option<String>,
    /// SCM spec file (TOML).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(short = 'n', long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dichotomize every numeric column at this threshold.
    #[arg(long)]
    pub binarize: Option<f64>,
    #[arg(short = 'o', long)]
    pub output: PathBuf,
}

#[derive(Args, Debug, Default)]
pub struct AnalyzeArgs {
    /// TOML file with analysis settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `stimulus-based` or `response-based`.
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long)]
    pub condition: Option<String>,
    /// Oracle mode on a canonical fixture.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Oracle mode on an SCM spec file (only its graph is used).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Data mode on a CSV dataset.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Divide alpha by the number of relevance queries.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub bonferroni: Option<bool>,
    /// Decoding relevance from CI tests (`ci`) or feature elimination (`rfe`).
    #[arg(long)]
    pub decoder: Option<String>,
    /// Permutation count for `--decoder rfe`.
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub faithfulness: Option<bool>,
    #[arg(long)]
    pub sufficiency: Option<bool>,
    /// Skip the structure search.
    #[arg(long)]
    pub no_combine: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON report path; the report goes to standard output when omitted.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Text rendering path.
    #[arg(long)]
    pub text: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    /// Comma-separated `name[:role]` list; roles default to `feature`.
    #[arg(long)]
    pub variables: String,
    /// File with one `indep A B | Z...` or `dep A B | Z...` line per statement.
    #[arg(long)]
    pub statements: Option<PathBuf>,
    /// Extra constraint: `randomized-root:V`, `no-outgoing-to-features:V`,
    /// `causal-sufficiency` or `max-hidden:K`. A stimulus variable implies
    /// `randomized-root` and a response `no-outgoing-to-features`.
    #[arg(long = "constraint")]
    pub constraints: Vec<String>,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// `fisher-z` or `g-test`.
    pub test: String,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rows per simulated null dataset.
    #[arg(short = 'n', long, default_value_t = 500)]
    pub n: usize,
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate::cmd_simulate(&a),
        Command::Analyze(a) => analyze::cmd_analyze(&a),
        Command::Demo => demo::cmd_demo(),
        Command::Enumerate(a) => enumerate::cmd_enumerate(&a),
        Command::Calibrate(a) => calibrate::cmd_calibrate(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}
