//! End-to-end checks of the `ftlab` binary: subcommands, artifact layout,
//! and determinism of reports under identical configs and seeds.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn ftlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ftlab"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ftlab-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn list_systems_names_builtins() {
    let out = ftlab().arg("list-systems").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["appendix-a-quadratic", "p-system-gamma2", "linear-advection2"] {
        assert!(text.contains(name), "missing {name} in: {text}");
    }
    assert!(text.contains("riemann_oracle"));
}

#[test]
fn check_emits_hypothesis_report() {
    let dir = temp_dir("check");
    let out = ftlab()
        .args(["check", "p-system-gamma2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("hypotheses.json")).unwrap()).unwrap();
    assert_eq!(rows["system"], "p-system-gamma2");
    assert_eq!(rows["sj_overall"], "PASSES");
    let first = &rows["rows"][0];
    assert!(first["gnl_value"].as_f64().unwrap() > 0.0);
    assert!(first["state"].is_array());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn run_writes_config_and_report() {
    let dir = temp_dir("run");
    let cfg_path = dir.join("cfg.json");
    fs::write(
        &cfg_path,
        r#"{"version": 1, "experiment": "riemann_oracle", "seed": 3, "cases": 10}"#,
    )
    .unwrap();
    let out_dir = dir.join("out");
    let out = ftlab()
        .arg("run")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("config.json").exists());
    assert!(out_dir.join("report.json").exists());
    assert!(out_dir.join("fan_profile_t1.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 3);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn invalid_config_version_rejected() {
    let dir = temp_dir("badcfg");
    let cfg_path = dir.join("cfg.json");
    fs::write(&cfg_path, r#"{"version": 9, "experiment": "hypotheses"}"#).unwrap();
    let out = ftlab().arg("run").arg(&cfg_path).output().unwrap();
    assert!(!out.status.success());
    let _ = fs::remove_dir_all(&dir);
}
