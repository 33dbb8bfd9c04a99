use std::path::Path;
use std::process::{Command, Output};

const SPEC: &str = "
system.n_t = 8
system.n_r = 4
system.streams = 1
system.n_rf_t = 2
system.n_rf_r = 2
experiment.algorithms = fully-digital, dps-full, omp
experiment.snr_db = 0, 10
experiment.trials = 2
sweep.variable = n_rf
sweep.values = 2, 4
";

fn hybeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybeam")).args(args).output().unwrap()
}

fn write_spec(dir: &Path, text: &str) -> String {
    let path = dir.join("spec.txt");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_prints_csv_and_respects_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SPEC);
    let out = hybeam(&["run", &spec, "--trials", "3", "--seed", "5", "--no-timing"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(hybeam::harness::CSV_HEADER));
    // 3 trials × 3 algorithms × 2 SNRs plus mean and stderr rows; the sweep is ignored.
    assert_eq!(lines.count(), 18 + 12);
}

#[test]
fn sweep_writes_file_and_sidecar_then_compares_with_itself() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SPEC);
    let csv = dir.path().join("out.csv");
    let csv_s = csv.to_str().unwrap();
    let out = hybeam(&["sweep", &spec, "--out", csv_s, "--threads", "2", "--no-timing"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out.csv.json").exists());
    let table = hybeam(&["compare", csv_s, csv_s]);
    assert!(table.status.success());
    let text = String::from_utf8(table.stdout).unwrap();
    let deltas: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    // 3 algorithms × 2 sweep values × 2 SNRs.
    assert_eq!(deltas.len(), 12);
    assert!(deltas.iter().all(|&d| d == 0.0));
}

#[test]
fn failures_exit_nonzero_with_tagged_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &SPEC.replace("system.n_t = 8", "system.n_t = eight"));
    let out = hybeam(&["run", &spec]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[spec-parse]:"));

    let missing = hybeam(&["run", "/nonexistent/spec.txt"]);
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error[io]:"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "not,a,result\n").unwrap();
    let out = hybeam(&["compare", bad.to_str().unwrap(), bad.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[schema]:"));

    let no_sweep = write_spec(dir.path(), &SPEC.replace("sweep.variable = n_rf\nsweep.values = 2, 4\n", ""));
    let out = hybeam(&["sweep", &no_sweep]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[invalid-config]:"));
}
