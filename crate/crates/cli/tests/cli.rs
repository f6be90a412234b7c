use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zakradar"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn empty_config_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, "{}").unwrap();
    let o = run(dir.path(), &["--config", cfg.to_str().unwrap(), "scene", "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&dir.path().join("manifest.json"));
    let s = &m["config"]["system"];
    assert_eq!(s["b"], 4e6);
    assert_eq!(s["t"], 0.02);
    assert_eq!(s["tau_p"], 1e-4);
    assert_eq!((s["p"].as_u64(), s["q"].as_u64()), (Some(4), Some(4)));
    assert_eq!(s["f_c"], 1e9);
    assert_eq!(m["seed"], 1);
    assert_eq!(m["input_hash"].as_str().unwrap().len(), 64);
    let scene = json(&dir.path().join("scene.json"));
    assert_eq!(scene.as_array().unwrap().len(), 4);
    assert!(scene[0]["tau_s"].as_f64().unwrap() >= 200e-6);
}

#[test]
fn non_integral_lattice_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--tau-p", "99e-6", "metrics"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("integer") && err.contains("M = B*tau_p"), "{err}");
}

#[test]
fn unknown_config_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"system": {"bandwith": 4e6}}"#).unwrap();
    let o = run(dir.path(), &["--config", cfg.to_str().unwrap(), "scene", "--seed", "1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bandwith"));
}

#[test]
fn gs_filter_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--filter", "gs", "scene", "--seed", "2"]);
    assert!(o.status.success());
    let f = &json(&dir.path().join("manifest.json"))["config"]["filter"];
    assert_eq!(f["alpha_tau"], 0.044);
    assert_eq!(f["alpha_nu"], 0.044);
    assert!((f["omega_tau"].as_f64().unwrap() - 1.0278).abs() < 1e-4);
}

#[test]
fn metrics_reports_the_sinc_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--filter", "sinc", "metrics", "--cut-per-bin", "200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&dir.path().join("metrics.json"));
    assert!((m["mlw_bins_10log"].as_f64().unwrap() - 1.99).abs() < 0.02);
    assert!((m["pslr_db"].as_f64().unwrap() + 6.65).abs() < 0.15);
    assert!((m["islr_db"].as_f64().unwrap() - 2.31).abs() < 0.5);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn validate_gaussian_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--filter", "gauss", "validate", "--points", "64", "--tol", "1e-6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("validation.json"))["pass"], true);
}

#[test]
fn monte_carlo_commands_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["roc", "--trials", "10"]);
    assert!(!o.status.success());
}

#[test]
fn roc_is_reproducible_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["roc", "--scene", "dense", "--snr-db", "-9", "--trials", "1000", "--seed", "7"];
    let mut one = vec!["--threads", "1"];
    one.extend(args);
    let mut three = vec!["--threads", "3"];
    three.extend(args);
    assert!(run(a.path(), &one).status.success());
    assert!(run(b.path(), &three).status.success());
    let ra = std::fs::read(a.path().join("roc.csv")).unwrap();
    assert_eq!(ra, std::fs::read(b.path().join("roc.csv")).unwrap());
    assert!(String::from_utf8_lossy(&ra).starts_with("gamma,pf,pd\n"));
    let names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.iter().filter(|n| n.to_string_lossy().contains("manifest")).count(), 1);
}

#[test]
fn detect_writes_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--filter", "gauss", "detect", "--scene", "sparse", "--mode", "iti", "--snr-db", "20", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("estimates.csv")).unwrap();
    assert!(text.starts_with("k,l,tau_s,nu_hz,h_re,h_im,range_m,velocity_mps\n"));
    assert_eq!(text.lines().count(), 5);
}
