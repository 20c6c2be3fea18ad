use std::collections::{BTreeMap, BTreeSet};

use neurocausal::citest::{conditional_g_test, partial_correlation};
use neurocausal::graph::{Dag, Variable};
use neurocausal::scm::{ExperimentKind, Mechanism, Scm};

use crate::outln;
use crate::{CalibrateArgs, Failure};

pub const MIN_TRIALS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullTest {
    FisherZ,
    GTest,
}

impl std::str::FromStr for NullTest {
    type Err = Failure;

    fn from_str(s: &str) -> Result<Self, Failure> {
        match s {
            "fisher-z" => Ok(NullTest::FisherZ),
            "g-test" => Ok(NullTest::GTest),
            other => Err(Failure::Usage(format!(
                "unknown test `{other}` (expected fisher-z or g-test)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub rejections: usize,
    pub trials: usize,
    pub rate: f64,
    /// 95% Wilson score interval for the rejection rate.
    pub interval: (f64, f64),
    /// Acceptance band `[alpha / 2, 2 alpha]`.
    pub band: (f64, f64),
}

impl Calibration {
    pub fn within_band(&self) -> bool {
        self.rate >= self.band.0 && self.rate <= self.band.1
    }
}

pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Three mutually independent variables A, B, Z (plus an unused stimulus):
/// Gaussian for the partial-correlation test, fair binary for the G test.
fn null_model(test: NullTest) -> Scm {
    let variables = vec![
        Variable::stimulus("S"),
        Variable::feature("A"),
        Variable::feature("B"),
        Variable::feature("Z"),
    ];
    let dag = Dag::empty(variables).expect("valid variables");
    let mut mechanisms = BTreeMap::new();
    mechanisms.insert("S".to_string(), Mechanism::uniform(2));
    for name in ["A", "B", "Z"] {
        let m = match test {
            NullTest::FisherZ => Mechanism::linear(&[]),
            NullTest::GTest => Mechanism::uniform(2),
        };
        mechanisms.insert(name.to_string(), m);
    }
    Scm::new(dag, mechanisms, ExperimentKind::StimulusBased).expect("valid null model")
}

/// Type-I error of `A ⊥ B | Z` over `trials` independent null datasets of
/// `n` rows; trial `t` samples with seed `seed + t`.
pub fn calibrate(
    test: NullTest,
    trials: usize,
    alpha: f64,
    seed: u64,
    n: usize,
) -> Result<Calibration, Failure> {
    if trials < MIN_TRIALS {
        return Err(Failure::Usage(format!(
            "at least {MIN_TRIALS} trials are needed, got {trials}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Failure::Usage(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let scm = null_model(test);
    let given: BTreeSet<String> = ["Z".to_string()].into();
    let mut rejections = 0;
    for t in 0..trials {
        let data = scm.sample(n, seed.wrapping_add(t as u64))?;
        let (_, p) = match test {
            NullTest::FisherZ => partial_correlation(&data, "A", "B", &given)?,
            NullTest::GTest => conditional_g_test(&data, "A", "B", &given)?,
        };
        if p <= alpha {
            rejections += 1;
        }
    }
    Ok(Calibration {
        rejections,
        trials,
        rate: rejections as f64 / trials as f64,
        interval: wilson_interval(rejections, trials),
        band: (alpha / 2.0, 2.0 * alpha),
    })
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<(), Failure> {
    let test: NullTest = args.test.parse()?;
    let c = calibrate(test, args.trials, args.alpha, args.seed, args.n)?;
    outln!(
        "{}: {} of {} null trials rejected at alpha {}; rate {:.4}, 95% CI [{:.4}, {:.4}]",
        args.test,
        c.rejections,
        c.trials,
        args.alpha,
        c.rate,
        c.interval.0,
        c.interval.1
    );
    outln!(
        "acceptance band [{}, {}]: {}",
        c.band.0,
        c.band.1,
        if c.within_band() { "pass" } else { "FAIL" }
    );
    if c.within_band() {
        Ok(())
    } else {
        Err(Failure::Analysis(format!(
            "rejection rate {:.4} outside the acceptance band",
            c.rate
        )))
    }
}
