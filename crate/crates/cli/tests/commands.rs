use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_neurocausal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(
        code(out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn simulate(dir: &TempDir, fixture: &str, n: &str, seed: &str) -> String {
    let file = path(dir, &format!("{fixture}-{seed}.csv"));
    let out = run(&[
        "simulate",
        "--fixture",
        fixture,
        "-n",
        n,
        "--seed",
        seed,
        "-o",
        &file,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    file
}

fn combined(report: &Value, feature: &str) -> String {
    report["claims"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["source"] == "combined" && c["feature"] == feature)
        .map(|c| c["claim"].as_str().unwrap().to_string())
        .unwrap()
}

#[test]
fn simulate_writes_typed_columns() {
    let dir = TempDir::new().unwrap();
    let file = simulate(&dir, "stim-chain", "50", "1");
    let text = fs::read_to_string(&file).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("S:stimulus,X1:feature,X2:feature"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = fs::read(simulate(&dir, "resp-chain", "200", "4")).unwrap();
    let b_path = path(&dir, "again.csv");
    let out = run(&[
        "simulate",
        "--fixture",
        "resp-chain",
        "-n",
        "200",
        "--seed",
        "4",
        "-o",
        &b_path,
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(a, fs::read(&b_path).unwrap());
    let c = fs::read(simulate(&dir, "resp-chain", "200", "5")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn simulate_drops_latent_columns() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(simulate(&dir, "resp-hidden-fig1", "10", "0")).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("X1:feature,X2:feature,R:response")
    );
}

#[test]
fn simulate_binarize_writes_categories() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "b.csv");
    let out = run(&[
        "simulate",
        "--fixture",
        "stim-chain",
        "-n",
        "30",
        "--binarize",
        "0",
        "-o",
        &file,
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&file).unwrap();
    for line in text.lines().skip(1) {
        assert!(
            line.split(',').all(|cell| cell == "0" || cell == "1"),
            "{line}"
        );
    }
}

#[test]
fn simulate_rejects_unknown_fixture_and_missing_source() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "x.csv");
    assert_eq!(
        code(&run(&["simulate", "--fixture", "nope", "-o", &file])),
        1
    );
    assert_eq!(code(&run(&["simulate", "-o", &file])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn simulate_from_spec_file() {
    let dir = TempDir::new().unwrap();
    let spec = path(&dir, "scm.toml");
    fs::write(
        &spec,
        r#"experiment = "stimulus-based"

[[variable]]
name = "S"
role = "stimulus"
mechanism = "discrete-cpt"
cardinality = 2
table = [[0.5, 0.5]]

[[variable]]
name = "X"
role = "feature"
parents = ["S"]
mechanism = "linear-gaussian"
intercept = 1.0
noise_variance = 0.5
weights = { S = 2.0 }
"#,
    )
    .unwrap();
    let file = path(&dir, "spec.csv");
    let out = run(&["simulate", "--spec", &spec, "-n", "20", "-o", &file]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().next(), Some("S:stimulus,X:feature"));

    fs::write(
        &spec,
        "experiment = \"stimulus-based\"\n[[variable]]\nname = 3\n",
    )
    .unwrap();
    assert_eq!(code(&run(&["simulate", "--spec", &spec, "-o", &file])), 1);
}

#[test]
fn analyze_oracle_identifies_unique_structure() {
    let report = json(&run(&["analyze", "--fixture", "stim-sec41"]));
    assert_eq!(report["structures"].as_array().unwrap().len(), 1);
    assert_eq!(
        report["shared_edges"],
        serde_json::json!(["S -> X1", "X2 -> X1"])
    );
    assert_eq!(combined(&report, "X1"), "GenuineEffect");
    assert_eq!(combined(&report, "X2"), "NotEffect");
}

#[test]
fn analyze_data_recovers_response_structures() {
    let dir = TempDir::new().unwrap();
    let data = simulate(&dir, "resp-sec42", "4000", "2");
    let report = json(&run(&["analyze", "--data", &data]));
    assert_eq!(report["experiment"], "response-based");
    assert_eq!(report["structures"].as_array().unwrap().len(), 2);
    assert_eq!(combined(&report, "X1"), "DirectCause");
    assert_eq!(combined(&report, "X2"), "PotentialCause");
    assert!(report["queries"]
        .as_array()
        .unwrap()
        .iter()
        .all(|q| q["p_value"].is_number()));
}

#[test]
fn analyze_pure_noise_finds_nothing() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "noise.csv");
    let mut text = String::from("S:stimulus,X1:feature,X2:feature\n");
    // Deterministic pseudo-noise unrelated to S.
    let mut state = 12345u64;
    for i in 0..2000 {
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        text.push_str(&format!("{},{},{}\n", i % 2, next(), next()));
    }
    fs::write(&csv, text).unwrap();
    let report = json(&run(&["analyze", "--data", &csv, "--bonferroni"]));
    for f in ["X1", "X2"] {
        assert_eq!(report["relevance"][f]["encoding"], false);
        assert_eq!(report["relevance"][f]["decoding"], false);
        assert_eq!(combined(&report, f), "NotEffect");
    }
    let decoding: Vec<&str> = report["claims"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["source"] == "decoding")
        .map(|c| c["claim"].as_str().unwrap())
        .collect();
    assert_eq!(decoding, ["NoClaim", "NoClaim"]);
}

#[test]
fn analyze_config_file_and_flag_override() {
    let dir = TempDir::new().unwrap();
    let config = path(&dir, "run.toml");
    fs::write(
        &config,
        "fixture = \"resp-hidden-fig1\"\nsufficiency = true\n",
    )
    .unwrap();
    // Under sufficiency the latent fork looks like a complete observed DAG.
    let report = json(&run(&["analyze", "--config", &config]));
    assert_eq!(report["assumptions"]["sufficiency"], true);
    assert_eq!(report["structures"].as_array().unwrap().len(), 2);
    let report = json(&run(&[
        "analyze",
        "--config",
        &config,
        "--sufficiency",
        "false",
    ]));
    assert_eq!(report["assumptions"]["sufficiency"], false);
    assert_eq!(report["structures"].as_array().unwrap().len(), 27);

    fs::write(&config, "fixture = \"stim-chain\"\nunknown_key = 1\n").unwrap();
    assert_eq!(code(&run(&["analyze", "--config", &config])), 1);
}

#[test]
fn analyze_output_files() {
    let dir = TempDir::new().unwrap();
    let json_path = path(&dir, "r.json");
    let text_path = path(&dir, "r.txt");
    let out = run(&[
        "analyze",
        "--fixture",
        "stim-chain",
        "-o",
        &json_path,
        "--text",
        &text_path,
    ]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["condition"], "S");
    let text = fs::read_to_string(&text_path).unwrap();
    assert!(text.contains("[combined] X2: GenuineEffect"));
}

#[test]
fn analyze_error_codes() {
    let dir = TempDir::new().unwrap();
    let missing = path(&dir, "missing.csv");
    assert_eq!(code(&run(&["analyze", "--data", &missing])), 2);
    assert_eq!(code(&run(&["analyze", "--config", &missing])), 2);
    assert_eq!(code(&run(&["analyze"])), 1);
    assert_eq!(
        code(&run(&[
            "analyze",
            "--fixture",
            "stim-chain",
            "--decoder",
            "rfe"
        ])),
        1
    );
    assert_eq!(
        code(&run(&[
            "analyze",
            "--fixture",
            "stim-chain",
            "--alpha",
            "0.05"
        ])),
        1
    );
    let bad = path(&dir, "bad.csv");
    fs::write(&bad, "S:stimulus,X1:feature\n0,1.0\n1\n").unwrap();
    assert_ne!(code(&run(&["analyze", "--data", &bad])), 0);
    let unwritable = Path::new(&missing).join("sub").join("r.json");
    let out = run(&[
        "analyze",
        "--fixture",
        "stim-chain",
        "-o",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn analyze_rfe_decoder() {
    let dir = TempDir::new().unwrap();
    let data = simulate(&dir, "stim-collider", "1500", "3");
    let args = [
        "analyze",
        "--data",
        &data,
        "--decoder",
        "rfe",
        "--permutations",
        "40",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let report = json(&a);
    assert_eq!(report["provenance"]["decoding"]["source"], "rfe");
    assert_eq!(report["relevance"]["X1"]["decoding"], true);
    assert_eq!(report["relevance"]["X2"]["decoding"], true);
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn demo_reports_all_fixtures() {
    let out = run(&["demo"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for name in [
        "stim-chain",
        "stim-collider",
        "resp-fork",
        "resp-chain",
        "resp-hidden-fig1",
        "stim-sec41",
        "resp-sec42",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

fn enumerate(dir: &TempDir, vars: &str, statements: &str, extra: &[&str]) -> Output {
    let file = path(dir, "statements.txt");
    fs::write(&file, statements).unwrap();
    let mut args = vec!["enumerate", "--variables", vars, "--statements", &file];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn enumerate_examples() {
    let dir = TempDir::new().unwrap();
    let out = enumerate(
        &dir,
        "S:stimulus,X1,X2",
        "dep S X1\nindep S X2\ndep S X1 | X2\ndep S X2 | X1\n",
        &[],
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("1 consistent structure(s)"));

    let out = enumerate(
        &dir,
        "X1,X2,R:response",
        "dep X1 R\ndep X2 R\ndep X1 R | X2\nindep X2 R | X1\n",
        &[],
    );
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("2 consistent structure(s)"), "{text}");
    assert!(text.contains("X1 -> R"));

    let out = run(&["enumerate", "--variables", "A,B,C"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("25 consistent structure(s)"));
}

#[test]
fn enumerate_failures() {
    let dir = TempDir::new().unwrap();
    let out = enumerate(&dir, "A,B", "indep A B\ndep A B\n", &[]);
    assert_eq!(code(&out), 3);
    // Unfaithful pattern: A and B marginally and conditionally dependent yet
    // A and C independent in both ways while B, C dependent only given A.
    let out = enumerate(
        &dir,
        "A,B,C",
        "indep A B\nindep A B | C\ndep A C\ndep B C\nindep A C | B\ndep B C | A\n",
        &[],
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("violates"));
    let out = enumerate(&dir, "A,B", "indep A Q\n", &[]);
    assert_eq!(code(&out), 1);
    let out = enumerate(&dir, "A,B", "", &["--constraint", "bogus"]);
    assert_eq!(code(&out), 1);
    let out = run(&["enumerate", "--variables", "A,B,C,D,E,F,G,H"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn enumerate_with_latent_constraint() {
    let dir = TempDir::new().unwrap();
    let out = enumerate(&dir, "A,B", "dep A B\n", &["--constraint", "max-hidden:1"]);
    assert_eq!(code(&out), 0);
    assert!(
        stdout(&out).starts_with("5 consistent structure(s)"),
        "{}",
        stdout(&out)
    );
    assert!(stdout(&out).contains("H1->A, H1->B  (latent H1)"));
}

#[test]
fn calibrate_trial_floor_and_determinism() {
    let args = [
        "calibrate",
        "fisher-z",
        "--trials",
        "100",
        "-n",
        "200",
        "--seed",
        "3",
    ];
    let a = run(&args);
    assert!(matches!(code(&a), 0 | 3));
    assert_eq!(a.stdout, run(&args).stdout);
    let out = run(&["calibrate", "g-test", "--trials", "99"]);
    assert_eq!(code(&out), 1);
    let out = run(&["calibrate", "t-test"]);
    assert_eq!(code(&out), 1);
}
