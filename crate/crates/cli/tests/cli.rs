use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mfront(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfront"))
        .args(args)
        .current_dir(cwd)
        .env("MFRONT_LOG", "error")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn metadata(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap()
}

#[test]
fn steady_burgers_writes_profile_and_kappa() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"problem": {"epsilon": 0.1, "n": 401}, "experiment": {"kind": "steady"}}"#,
    );
    let o = mfront(&["steady", "--config", &cfg, "--out", "res"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("res");
    let csv = fs::read_to_string(out.join("steady_eps0.1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 402);
    let kappa = metadata(&out)["points"][0]["kappa"].as_f64().unwrap();
    // kappa tanh(kappa / (2 eps)) = 1 at eps = 0.1
    assert!((kappa * (kappa / 0.2).tanh() - 1.0).abs() < 1e-9);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("eps=")).count(), 1);
}

#[test]
fn malformed_config_exits_2_with_field_path() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"problem": {"epsilon": 0.1, "n": "2001"}, "experiment": {"kind": "steady"}}"#,
    );
    let o = mfront(&["steady", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("problem.n"));

    let cfg = write_config(
        tmp.path(),
        r#"{"problem": {"epsilon": 0.1, "n": 101, "colour": 1}, "experiment": {"kind": "steady"}}"#,
    );
    assert_eq!(mfront(&["steady", "--config", &cfg], tmp.path()).status.code(), Some(2));
}

#[test]
fn subcommand_must_match_kind() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"problem": {"epsilon": 0.1, "n": 101}, "experiment": {"kind": "steady"}}"#,
    );
    assert_eq!(mfront(&["spectrum", "--config", &cfg], tmp.path()).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_and_leaves_partial_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"problem": {"epsilon": [0.1, 0.005], "n": 41}, "experiment": {"kind": "spectrum", "xi": 0.2}}"#,
    );
    let o = mfront(&["spectrum", "--config", &cfg, "--out", "res"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    let out = tmp.path().join("res");
    assert!(out.join("spectrum_eps0.1_partial.csv").exists());
    assert!(out.join("metadata_partial.json").exists());
    assert!(!out.join("spectrum_eps0.1.csv").exists());
}

#[test]
fn csv_bodies_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"problem": {"epsilon": [0.08, 0.1], "n": 301}, "experiment": {"kind": "spectrum", "xi": 0.1, "k": 3}}"#,
    );
    for dir in ["a", "b"] {
        let o = mfront(&["spectrum", "--config", &cfg, "--out", dir, "--jobs", "2"], tmp.path());
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["spectrum_eps0.08.csv", "eigenfunctions_eps0.1.csv"] {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn spectrum_sweep_writes_table_and_fit() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"problem": {"epsilon": {"start": 0.08, "stop": 0.1, "step": 0.01}, "n": 401},
            "experiment": {"kind": "sweep", "target": {"kind": "spectrum", "xi": 0.2}, "output": "sw"}}"#,
    );
    let o = mfront(&["sweep", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("sw");
    let table = fs::read_to_string(out.join("eigen_scaling.csv")).unwrap();
    assert!(table.starts_with("epsilon,lambda1,lambda2,gap\n"));
    assert_eq!(table.lines().count(), 4);
    for e in ["0.08", "0.09", "0.1"] {
        assert!(out.join(format!("spectrum_eps{e}.csv")).exists());
    }
    let fit: Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert!(fit["slope"].as_f64().unwrap() < 0.0);
    assert!(fit["r_squared"].as_f64().unwrap() > 0.99);
}

#[test]
fn repro_presets_with_small_problems() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path().join("small.json");
    fs::write(&p, r#"{"problem": {"epsilon": [0.09, 0.1, 0.11], "n": 401}}"#).unwrap();
    let p = p.to_str().unwrap();

    let o = mfront(&["repro", "slow-motion", "--config", p, "--out", "sm"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = metadata(&tmp.path().join("sm"));
    let fit = &m["summary"]["t_half_fit"];
    let c = fit["slope"].as_f64().unwrap();
    let ci = fit["slope_ci95"].as_array().unwrap();
    assert!(c > 0.0 && ci[0].as_f64().unwrap() < c && c < ci[1].as_f64().unwrap());

    let o = mfront(&["repro", "residual-map", "--config", p, "--out", "rm"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("rm/residual_map.csv")).unwrap();
    assert!(csv.starts_with("epsilon,xi,log10_omega\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 37);

    fs::write(tmp.path().join("pde.json"), r#"{"problem": {"epsilon": 0.1, "n": 201}}"#).unwrap();
    let o = mfront(&["repro", "pde-vs-reduced", "--config", "pde.json", "--out", "pr"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = metadata(&tmp.path().join("pr"));
    let d = m["points"][0]["max_discrepancy"].as_f64().unwrap();
    assert!(d.is_finite() && d <= m["points"][0]["tolerance"].as_f64().unwrap());
    assert!(tmp.path().join("pr/comparison_eps0.1.csv").exists());
}

#[test]
fn print_config_is_a_valid_config() {
    let tmp = TempDir::new().unwrap();
    let o = mfront(&["repro", "eigen-scaling", "--print-config"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let cfg = write_config(tmp.path(), &String::from_utf8_lossy(&o.stdout));
    // the preset itself is the full-size sweep; only check it parses by
    // routing it to the wrong subcommand
    let o = mfront(&["steady", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`sweep` experiment"));
}
