use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fep")).args(args).env_remove("FEP_OUT_ROOT").output().unwrap()
}

fn fep_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    fep(&all)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&fep(&["hit", "--bogus", "1"])), 2);
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n": 12, "zzz": 1}"#).unwrap();
    let o = fep_in(&dir.path().join("out"), &["hit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("zzz"));
}

#[test]
fn asymmetric_circle_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fep_in(dir.path(), &["hit", "--start", "circle-block", "--p", "0.7", "--reps", "4"])), 2);
}

#[test]
fn plotdata_without_results_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fep(&["plotdata", dir.path().to_str().unwrap()])), 2);
}

#[test]
fn small_segment_mixing_time() {
    let dir = tempfile::tempdir().unwrap();
    let o = fep_in(dir.path(), &["exact", "tv", "--family", "fep-seg", "--n", "4", "--k", "3", "--p", "0.5", "--eps", "0.25"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("2.773438"));
    let csv = std::fs::read_to_string(dir.path().join("tv_curve.csv")).unwrap();
    assert!(csv.starts_with("t,d,argmax\n"));
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["tool"], "fep");
    assert_eq!(m["schema"], 1);
    assert_eq!(m["command"], serde_json::json!(["exact", "tv"]));
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&"tv_curve.csv") && outputs.contains(&"summary.json"));

    let plot = dir.path().join("plot");
    let o = fep(&["plotdata", dir.path().to_str().unwrap(), "--out", plot.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(plot.join("plot.csv")).unwrap().starts_with("t,d\n"));
}

#[test]
fn slope_sweep_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = fep_in(dir.path(), &["sweep", "afep-slope", "--p", "0.7", "--gaps", "3,4,5", "--reps", "30", "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("summary.json"));
    assert!(s["fit"]["statistic"].as_f64().unwrap().is_finite());
    assert!(s["fit"]["slope_se"].as_f64().unwrap() > 0.0);
    assert_eq!(s["grid"].as_array().unwrap().len(), 3);

    let o = fep(&["plotdata", dir.path().to_str().unwrap(), "-q"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("plot.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# slope = "));
    assert_eq!(lines.next(), Some("gap,log_mean"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn out_root_from_environment() {
    let root = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fep"))
        .args(["simulate", "circle", "--n", "10", "--k", "7", "--horizon", "5", "-q"])
        .env("FEP_OUT_ROOT", root.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(root.path().join("simulate-circle").join("trajectory.csv").exists());
}

#[test]
fn verify_small_systems() {
    let dir = tempfile::tempdir().unwrap();
    let o = fep_in(dir.path(), &["verify", "--max-n", "7", "--reps", "300", "-q"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
}
