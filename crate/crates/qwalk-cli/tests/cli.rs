//! Black-box tests of the `qwalk` binary: exit codes, emitted files, and
//! the numeric claims printed or persisted by each subcommand.

use std::path::Path;
use std::process::{Command, Output};

fn qwalk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should spawn")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

/// Final value of the schmidt_norm column of a schmidt.csv table.
fn last_schmidt(path: &Path) -> f64 {
    let text = std::fs::read_to_string(path).expect("schmidt table should exist");
    let last = text.lines().last().expect("table has data rows");
    last.split(',')
        .nth(1)
        .expect("rows are step,schmidt_norm")
        .parse()
        .expect("schmidt_norm parses as f64")
}

#[test]
fn walk_writes_tables_and_reports_final_entanglement() {
    let dir = tempfile::tempdir().unwrap();
    let output = qwalk(
        &["walk", "--steps", "10", "--coin", "hadamard", "--out", "run"],
        dir.path(),
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let run = dir.path().join("run");
    for name in ["step-density.csv", "schmidt.csv", "state.csv", "schedule.json", "manifest.json"]
    {
        assert!(run.join(name).is_file(), "{name} missing");
    }
    let final_s = last_schmidt(&run.join("schmidt.csv"));
    assert!((final_s - 1.377_366_075_7).abs() <= 1e-9, "final S = {final_s}");
    assert!(stdout(&output).contains("final S = 1.377366076"));
}

#[test]
fn walk_runs_a_schedule_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("one-step.json"),
        format!("[{{\"xi\": 0.0, \"zeta\": 0.0, \"theta\": {}}}]\n", std::f64::consts::FRAC_PI_4),
    )
    .unwrap();
    let output = qwalk(
        &["walk", "--steps", "1", "--coin", "file", "one-step.json", "--out", "run"],
        dir.path(),
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let final_s = last_schmidt(&dir.path().join("run/schmidt.csv"));
    assert!((final_s - 1.41421).abs() <= 1e-5, "final S = {final_s}");
}

#[test]
fn walk_rejects_zero_steps_as_usage() {
    let dir = tempfile::tempdir().unwrap();
    let output = qwalk(&["walk", "--steps", "0"], dir.path());
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn walk_rejects_a_step_count_mismatch_with_the_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("one-step.json"),
        "[{\"xi\": 0.0, \"zeta\": 0.0, \"theta\": 0.5}]\n",
    )
    .unwrap();
    let output = qwalk(
        &["walk", "--steps", "2", "--coin", "file", "one-step.json"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_flags_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let output = qwalk(&["walk", "--bogus"], dir.path());
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn optimize_is_reproducible_and_reports_spread_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let args =
        ["optimize", "--steps", "3", "--beta", "0.1", "--hops", "5", "--seed", "9", "--out"];
    let first = qwalk(&[&args[..], &["a"]].concat(), dir.path());
    let second = qwalk(&[&args[..], &["b"]].concat(), dir.path());
    assert!(first.status.success() && second.status.success());

    let bytes_a = std::fs::read(dir.path().join("a/opt-result.json")).unwrap();
    let bytes_b = std::fs::read(dir.path().join("b/opt-result.json")).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed should give byte-identical results");

    let report: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert!(report["final_participation_ratio"].is_f64());
    assert!(report["final_schmidt_norm"].is_f64());
    assert!(report["final_n"].is_array());
    assert!(report["result"]["best_params"].as_array().unwrap().len() == 9);
    assert!(dir.path().join("a/hop-trace.csv").is_file());
    assert!(dir.path().join("a/schedule.json").is_file());
}

#[test]
fn optimize_reaches_high_entanglement_at_ten_steps() {
    let dir = tempfile::tempdir().unwrap();
    let output = qwalk(&["optimize", "--steps", "10", "--seed", "7", "--out", "run"], dir.path());
    assert!(output.status.success());
    let text = stdout(&output);
    let s: f64 = text
        .split("best S = ")
        .nth(1)
        .and_then(|rest| rest.split_whitespace().next())
        .expect("line starts with best S")
        .parse()
        .expect("S parses");
    assert!(s >= 1.414, "reported S = {s}");
}

#[test]
fn batch_reports_the_requested_sample_count() {
    let dir = tempfile::tempdir().unwrap();
    let output = qwalk(
        &[
            "batch", "--samples", "50", "--steps", "3", "--hops", "2", "--local-iters", "80",
            "--seed", "3", "--out", "run",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let run = dir.path().join("run");
    let stats: serde_json::Value =
        serde_json::from_slice(&std::fs::read(run.join("batch-stats.json")).unwrap()).unwrap();
    assert_eq!(stats["n_total"], 50);
    assert_eq!(stats["final_schmidt_norms"].as_array().unwrap().len(), 50);

    let lines = std::fs::read_to_string(run.join("runs.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 50);

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "batch");
    assert_eq!(manifest["config"]["experiment"]["n_samples"], 50);
    assert_eq!(manifest["config"]["optimizer"]["n_hops"], 2);
}

#[test]
fn spread_writes_a_normalized_final_density_table() {
    let dir = tempfile::tempdir().unwrap();
    let output = qwalk(
        &[
            "spread", "--steps", "4", "--beta", "0.1", "--hops", "6", "--seed", "2", "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let table = std::fs::read_to_string(dir.path().join("run/final-density.csv")).unwrap();
    let mut total = 0.0;
    for line in table.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let site: i32 = fields[1].parse().unwrap();
        let density: f64 = fields[3].parse().unwrap();
        total += density;
        if site.rem_euclid(2) == 1 {
            assert_eq!(density, 0.0, "odd site {site} populated");
        }
    }
    assert!((total - 1.0).abs() <= 1e-9, "densities sum to {total}");
    assert!(dir.path().join("run/spread-result.json").is_file());
    assert!(dir.path().join("run/hop-trace.csv").is_file());
}

#[test]
fn spread_requires_a_positive_weight() {
    let dir = tempfile::tempdir().unwrap();
    let output = qwalk(&["spread", "--beta", "0"], dir.path());
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn tomography_round_trips_a_stored_state() {
    let dir = tempfile::tempdir().unwrap();
    let walk = qwalk(
        &["walk", "--steps", "3", "--coin", "random", "--seed", "5", "--out", "walk"],
        dir.path(),
    );
    assert!(walk.status.success());

    let tomo = qwalk(
        &["tomo", "--input", "walk/state.csv", "--shots", "0", "--out", "tomo"],
        dir.path(),
    );
    assert!(tomo.status.success(), "stderr: {}", String::from_utf8_lossy(&tomo.stderr));

    let report: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dir.path().join("tomo/reconstruction.json")).unwrap(),
    )
    .unwrap();
    let rebuilt = report["reconstructed"]["schmidt_norm"].as_f64().unwrap();
    let direct = report["direct"]["schmidt_norm"].as_f64().unwrap();
    assert!((rebuilt - direct).abs() <= 1e-10, "rebuilt {rebuilt} vs direct {direct}");
    assert!(dir.path().join("tomo/measurements.csv").is_file());
    assert!(dir.path().join("tomo/measurements.json").is_file());
}

#[test]
fn tomography_with_finite_shots_stays_close() {
    let dir = tempfile::tempdir().unwrap();
    qwalk(
        &["walk", "--steps", "4", "--coin", "hadamard", "--out", "walk"],
        dir.path(),
    );
    let tomo = qwalk(
        &["tomo", "--input", "walk/state.csv", "--shots", "1000000", "--seed", "4", "--out", "t"],
        dir.path(),
    );
    assert!(tomo.status.success());
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("t/reconstruction.json")).unwrap())
            .unwrap();
    let rebuilt = report["reconstructed"]["schmidt_norm"].as_f64().unwrap();
    let direct = report["direct"]["schmidt_norm"].as_f64().unwrap();
    assert!((rebuilt - direct).abs() <= 5e-2, "rebuilt {rebuilt} vs direct {direct}");
}

#[test]
fn missing_input_file_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = qwalk(&["tomo", "--input", "missing.csv"], dir.path());
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn json_format_replaces_tables_with_a_report_document() {
    let dir = tempfile::tempdir().unwrap();
    let output = qwalk(
        &["walk", "--steps", "4", "--format", "json", "--out", "run"],
        dir.path(),
    );
    assert!(output.status.success());
    let run = dir.path().join("run");
    assert!(run.join("walk-report.json").is_file());
    assert!(!run.join("schmidt.csv").exists());
    assert!(!run.join("step-density.csv").exists());

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(run.join("walk-report.json")).unwrap()).unwrap();
    assert_eq!(report["schmidt_per_step"].as_array().unwrap().len(), 5);
    assert_eq!(report["density_per_step"].as_array().unwrap().len(), 5);
}
