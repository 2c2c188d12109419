//! End-to-end checks of the binary contract: config resolution and
//! precedence, field-naming diagnostics, exit codes, determinism, and one
//! quick run of each experiment command.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::Command as Process;

use clap::Parser;
use tempfile::TempDir;

use qlho_cli::config::{CliArgs, Command, ConfigError, ExperimentConfig};
use qlho_cli::runner::{run_experiment, RunError, RunOutcome};

fn qlho() -> Process {
    Process::new(env!("CARGO_BIN_EXE_qlho"))
}

fn config_from(pairs: &[(&str, &str)], out: PathBuf) -> ExperimentConfig {
    let map: BTreeMap<String, String> =
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let mut cfg = ExperimentConfig::from_map(&map).expect("test config is valid");
    cfg.out = out;
    cfg
}

fn run(pairs: &[(&str, &str)], dir: &TempDir) -> (ExperimentConfig, RunOutcome) {
    let cfg = config_from(pairs, dir.path().join("run"));
    let outcome = run_experiment(&cfg).expect("run completes");
    (cfg, outcome)
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("exp.conf");
    fs::write(&path, "# comment\ncommand=moments\nn-start=5\nn-end=9\n").unwrap();
    let args = CliArgs::parse_from([
        "qlho",
        "--config",
        path.to_str().unwrap(),
        "--n-end",
        "7",
    ]);
    let cfg = ExperimentConfig::from_cli(&args).unwrap();
    assert_eq!(cfg.command, Command::Moments);
    assert_eq!(cfg.n_start, 5);
    assert_eq!(cfg.n_end, 7);
}

#[test]
fn unknown_config_key_is_named() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("exp.conf");
    fs::write(&path, "command=moments\nwibble=3\n").unwrap();
    let args = CliArgs::parse_from(["qlho", "--config", path.to_str().unwrap()]);
    let err = ExperimentConfig::from_cli(&args).unwrap_err();
    assert!(matches!(err, ConfigError::UnknownKey { ref key } if key == "wibble"), "{err}");
}

#[test]
fn out_of_domain_weight_exits_2_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let output = qlho()
        .args([
            "--command",
            "moments",
            "--alpha-rule",
            "const:1.5",
            "--out",
            dir.path().join("run").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("alpha-rule"), "stderr: {stderr}");
}

#[test]
fn moments_default_passes_and_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    for stem in ["a", "b"] {
        let status = qlho()
            .args([
                "--command",
                "moments",
                "--out",
                dir.path().join(stem).to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let csv_a = fs::read(dir.path().join("a.csv")).unwrap();
    let csv_b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let rep_a = fs::read(dir.path().join("a.report.txt")).unwrap();
    let rep_b = fs::read(dir.path().join("b.report.txt")).unwrap();
    assert_eq!(rep_a, rep_b);

    let text = String::from_utf8(rep_a).unwrap();
    assert!(text.contains("overall: pass"), "{text}");
    // header + one row per grid point at the single default index
    let csv = String::from_utf8(csv_a).unwrap();
    assert_eq!(csv.lines().count(), 1 + 101);
}

#[test]
fn normalization_short_range_passes() {
    let dir = TempDir::new().unwrap();
    let (_, outcome) =
        run(&[("command", "normalization"), ("n-end", "12"), ("grid-points", "51")], &dir);
    assert!(outcome.pass);
    let csv = fs::read_to_string(outcome.csv_path).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12);
    assert!(csv.lines().skip(1).all(|line| line.ends_with(",pass")), "{csv}");
}

#[test]
fn dwa_thinning_keeps_every_verdict_but_fewer_rows() {
    let dir = TempDir::new().unwrap();
    let (_, outcome) = run(
        &[
            ("command", "dwa-korovkin"),
            ("n-start", "1"),
            ("n-end", "30"),
            ("n-step", "7"),
            ("grid-points", "201"),
            ("eps", "0.05"),
            ("eps-prime", "0.15"),
        ],
        &dir,
    );
    assert!(outcome.pass);
    let csv = fs::read_to_string(outcome.csv_path).unwrap();
    // sampled indices 1, 8, 15, 22, 29 plus the forced endpoint 30
    assert_eq!(csv.lines().count(), 1 + 6);
    let report = fs::read_to_string(outcome.report_path).unwrap();
    assert!(report.contains("inclusion_violations: 0"), "{report}");
}

#[test]
fn psum_quick_run_passes() {
    let dir = TempDir::new().unwrap();
    let (_, outcome) = run(
        &[
            ("command", "psum-korovkin"),
            ("n-cap", "40"),
            ("grid-points", "51"),
            ("u-grid", "dyadic:4:14"),
        ],
        &dir,
    );
    assert!(outcome.pass);
    let csv = fs::read_to_string(outcome.csv_path).unwrap();
    assert_eq!(csv.lines().count(), 1 + 11);
}

#[test]
fn counterexample_separates_classical_from_transformed() {
    let dir = TempDir::new().unwrap();
    let (_, outcome) = run(
        &[
            ("command", "counterexample"),
            ("n-cap", "100"),
            ("grid-points", "51"),
            ("u-grid", "list:0.99,0.999,0.9999"),
        ],
        &dir,
    );
    assert!(outcome.pass);
    let report = fs::read_to_string(outcome.report_path).unwrap();
    assert!(report.contains("claim_spikes"), "{report}");
    assert!(report.contains("overall: pass"), "{report}");
    let csv = fs::read_to_string(outcome.csv_path).unwrap();
    let last = csv.lines().last().unwrap();
    let res_e0: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(res_e0 <= 0.02, "transformed e0 residual {res_e0} at the last u");
}

#[test]
fn regularity_cesaro_window_passes() {
    let dir = TempDir::new().unwrap();
    let (_, outcome) = run(&[("command", "regularity"), ("matrix", "cesaro")], &dir);
    assert!(outcome.pass);
    let csv = fs::read_to_string(outcome.csv_path).unwrap();
    assert_eq!(csv.lines().count(), 1 + 10);
    let report = fs::read_to_string(outcome.report_path).unwrap();
    assert!(report.contains("column_peak_non_increasing: true"), "{report}");
}

#[test]
fn u_beyond_the_radius_is_reported_on_the_u_grid_field() {
    let dir = TempDir::new().unwrap();
    let cfg = config_from(
        &[
            ("command", "psum-korovkin"),
            ("pn", "geometric:1.25"),
            ("u-grid", "list:0.9"),
            ("n-cap", "20"),
            ("grid-points", "11"),
        ],
        dir.path().join("run"),
    );
    let err = run_experiment(&cfg).unwrap_err();
    match err {
        RunError::Config { ref field, .. } => assert_eq!(field, "u-grid"),
        other => panic!("expected a config error, got {other}"),
    }
}
