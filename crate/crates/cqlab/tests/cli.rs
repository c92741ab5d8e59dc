//! End-to-end runs of the binary.

use std::path::Path;
use std::process::{Command, Output};

fn cqlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CQLAB_OUT")
        .output()
        .expect("binary runs")
}

#[test]
fn solve_reports_beta_one_at_zero_energy_soliton() {
    let dir = tempfile::tempdir().unwrap();
    let o = cqlab(&["solve", "--omega", "0.054735"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("solution.json")).unwrap()).unwrap();
    let beta = doc["data"]["beta"].as_f64().unwrap();
    assert!((beta - 1.0).abs() < 5e-5, "beta = {beta}");
    assert!(doc["header"]["config_hash"].as_str().unwrap().len() == 64);
    assert_eq!(doc["header"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn omega_outside_range_is_a_hard_error() {
    let dir = tempfile::tempdir().unwrap();
    for w in ["0.2", "0", "-0.01"] {
        let o = cqlab(&["solve", "--omega", w], dir.path());
        assert_eq!(o.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&o.stderr).contains("omega outside (0, 3/16)"));
    }
}

#[test]
fn invalid_tolerance_is_a_hard_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cqlab(&["solve", "--omega", "0.05", "--tol-b", "0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["evolve", "--omega", "0.05", "--t-end", "0.02", "--grid-n", "1024"];
    assert_eq!(cqlab(&args, a.path()).status.code(), Some(0));
    assert_eq!(cqlab(&args, b.path()).status.code(), Some(0));
    for name in ["observables.csv", "observables.json", "evolution.csv", "evolution.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn every_csv_carries_a_header() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cqlab(&["solve", "--omega", "0.03", "--format", "csv"], dir.path()).status.code(), Some(0));
    assert!(!dir.path().join("profile.json").exists());
    let text = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert_eq!(header.len(), 3);
    assert!(header[0].starts_with("# cqlab "));
    assert!(header[1].starts_with("# config_hash: "));
    assert!(header[2].contains("grid_n") && header[2].contains("dt"));
    assert_eq!(text.lines().nth(3), Some("r,P,dP"));
}

#[test]
fn env_var_overrides_out() {
    let (flag, env) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = Command::new(env!("CARGO_BIN_EXE_cqlab"))
        .args(["solve", "--omega", "0.03", "--format", "json", "--out"])
        .arg(flag.path())
        .env("CQLAB_OUT", env.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(env.path().join("solution.json").exists());
    assert!(!flag.path().join("solution.json").exists());
}

#[test]
fn evolve_reloads_a_solved_profile() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cqlab(&["solve", "--omega", "0.05"], dir.path()).status.code(), Some(0));
    let input = dir.path().join("profile.json");
    let run = tempfile::tempdir().unwrap();
    let o = cqlab(&["evolve", "--input", input.to_str().unwrap(), "--t-end", "0.05"], run.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(run.path().join("evolution.json")).unwrap()).unwrap();
    assert!(doc["data"]["mass_drift"].as_f64().unwrap() < 1e-10);
}
