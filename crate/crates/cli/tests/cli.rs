//! End-to-end tests driving the compiled binary: exit codes, artifact
//! files, determinism, and config/flag precedence.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyndict"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn simulate_repeats_exactly_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let res = run(&[
            "--seed",
            "123",
            "--out",
            out.to_str().unwrap(),
            "simulate",
            "--system",
            "ou",
            "--m",
            "200",
        ]);
        assert_eq!(code(&res), 0, "stderr: {}", stderr(&res));
    }
    let left = std::fs::read(a.join("dataset.csv")).unwrap();
    let right = std::fs::read(b.join("dataset.csv")).unwrap();
    assert_eq!(left, right, "same seed must give byte-identical datasets");
}

#[test]
fn simulate_rejects_lag_that_is_not_a_step_multiple() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "simulate",
        "--system",
        "ou",
        "--tau",
        "0.5",
        "--eta",
        "0.3",
        "--m",
        "50",
    ]);
    assert_eq!(code(&res), 2, "stderr: {}", stderr(&res));
    assert!(!dir.path().join("dataset.csv").exists());
}

#[test]
fn simulate_reports_blow_up_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "simulate",
        "--system",
        "ou",
        "--tau",
        "100",
        "--eta",
        "10",
        "--m",
        "100",
    ]);
    assert_eq!(code(&res), 3, "stderr: {}", stderr(&res));
    assert!(stderr(&res).contains("non-finite"));
}

#[test]
fn unknown_config_keys_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "mystery = 1\n").unwrap();
    let res = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "simulate",
        "--system",
        "ou",
    ]);
    assert_eq!(code(&res), 2, "stderr: {}", stderr(&res));
    assert!(stderr(&res).contains("mystery"));
}

#[test]
fn missing_system_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&["--out", dir.path().to_str().unwrap(), "fit"]);
    assert_eq!(code(&res), 2, "stderr: {}", stderr(&res));
}

#[test]
fn flags_override_config_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "system = \"ou\"\n\n[params]\nm = 300\n").unwrap();

    let from_file = dir.path().join("from_file");
    let res = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        from_file.to_str().unwrap(),
        "simulate",
    ]);
    assert_eq!(code(&res), 0, "stderr: {}", stderr(&res));
    assert!(read(&from_file.join("dataset.csv")).contains("# m: 300"));

    let from_flag = dir.path().join("from_flag");
    let res = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        from_flag.to_str().unwrap(),
        "simulate",
        "--m",
        "200",
    ]);
    assert_eq!(code(&res), 0, "stderr: {}", stderr(&res));
    assert!(read(&from_flag.join("dataset.csv")).contains("# m: 200"));
}

#[test]
fn scan_with_resolution_one_writes_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "scan",
        "--system",
        "chua",
        "--lo",
        "1.21",
        "--hi",
        "1.21",
        "--resolution",
        "1",
    ]);
    assert_eq!(code(&res), 0, "stderr: {}", stderr(&res));
    let table = read(&dir.path().join("landscape.csv"));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 2, "header plus exactly one row: {table}");
    assert_eq!(lines[0], "value,loss");
    assert!(lines[1].starts_with("1.21,"));
}

#[test]
fn scan_rejects_untrainable_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "scan",
        "--system",
        "chua",
        "--param",
        "w9",
        "--lo",
        "0.0",
        "--hi",
        "1.0",
        "--resolution",
        "3",
    ]);
    assert_eq!(code(&res), 2, "stderr: {}", stderr(&res));
}

#[test]
fn fit_divergence_exits_4_and_keeps_history() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "fit",
        "--system",
        "chua",
        "--step-size",
        "1e12",
        "--max-iters",
        "10",
    ]);
    assert_eq!(code(&res), 4, "stderr: {}", stderr(&res));
    assert!(stderr(&res).contains("diverged"));
    let history = read(&dir.path().join("history.csv"));
    assert!(history.starts_with("iteration,loss_coeff"));
    assert!(history.lines().count() >= 2, "history must hold the recorded iterations");
}

#[test]
fn fit_then_spectrum_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let fit_dir = dir.path().join("fit");
    let res = run(&[
        "--out",
        fit_dir.to_str().unwrap(),
        "fit",
        "--system",
        "ou",
        "--max-iters",
        "40",
    ]);
    assert_eq!(code(&res), 0, "stderr: {}", stderr(&res));
    for artifact in ["model.json", "history.csv", "eigenvalues.csv", "eigenfunctions.csv"] {
        assert!(fit_dir.join(artifact).exists(), "missing {artifact}");
    }

    let spec_dir = dir.path().join("spectrum");
    let model = fit_dir.join("model.json");
    let res = run(&[
        "--out",
        spec_dir.to_str().unwrap(),
        "spectrum",
        "--model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "stderr: {}", stderr(&res));
    let table = read(&spec_dir.join("eigenvalues.csv"));
    assert!(table.starts_with("index,re,im,modulus"));
    // decomposing the saved operator must reproduce the fit's table
    assert_eq!(table, read(&fit_dir.join("eigenvalues.csv")));
}

#[test]
fn ou_fit_defaults_recover_the_expected_moduli() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&["--out", dir.path().to_str().unwrap(), "fit", "--system", "ou"]);
    assert_eq!(code(&res), 0, "stderr: {}", stderr(&res));
    let table = read(&dir.path().join("eigenvalues.csv"));
    let moduli: Vec<f64> = table
        .lines()
        .skip(1)
        .take(3)
        .map(|line| line.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    let expected = [1.0, 0.6065, 0.3679];
    for (got, want) in moduli.iter().zip(expected) {
        assert!(
            (got - want).abs() <= 0.05 * want,
            "moduli {moduli:?} should be within 5% of {expected:?}"
        );
    }
}

#[test]
fn single_benchmark_runs_and_passes() {
    let res = run(&["benchmark", "--only", "ou"]);
    assert_eq!(code(&res), 0, "stderr: {}", stderr(&res));
    let text = stdout(&res);
    assert!(text.contains("[PASS] ou:"), "stdout: {text}");
    assert!(text.contains("all benchmarks passed"), "stdout: {text}");
}

#[test]
fn unknown_benchmark_name_is_a_config_error() {
    let res = run(&["benchmark", "--only", "nope"]);
    assert_eq!(code(&res), 2, "stderr: {}", stderr(&res));
}
