use std::path::Path;
use std::process::{Command, Output};

use nvsbs::runner::{RunManifest, Scenario};

fn nvsbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nvsbs")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn flags_reach_the_manifest_and_reruns_are_identical() {
    let root = tempfile::tempdir().unwrap();
    let first = root.path().join("a");
    let out = nvsbs(&[
        "fidelity",
        "--seed",
        "5",
        "--ensemble",
        "2",
        "--b-gauss",
        "20",
        "--polarization",
        "0.7",
        "--macrofraction-size",
        "8",
        "--out-dir",
        path(&first),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let manifest = RunManifest::load(&first.join("manifest.json")).unwrap();
    assert_eq!(manifest.scenario, Scenario::Fidelity);
    assert_eq!(manifest.config.field_gauss, 20.0);
    assert_eq!(manifest.config.polarizations, Some(vec![0.7]));
    assert_eq!(manifest.config.macrofraction_sizes, Some(vec![8]));
    assert_eq!(manifest.seeds.len(), 2);
    assert_eq!(manifest.files, vec!["fidelity.csv".to_string()]);

    let second = root.path().join("b");
    let out = nvsbs(&[
        "fidelity",
        "--config",
        path(&first.join("manifest.json")),
        "--out-dir",
        path(&second),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let read = |d: &Path| std::fs::read(d.join("fidelity.csv")).unwrap();
    assert_eq!(read(&first), read(&second));
}

#[test]
fn plain_config_file_is_accepted() {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seeds": [1, 2], "field_gauss": 10.0}"#).unwrap();
    let out = nvsbs(&[
        "stats",
        "--config",
        path(&cfg),
        "--out-dir",
        path(&root.path().join("o")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("mean counts over 2 realizations"));
}

#[test]
fn manifest_from_another_scenario_is_refused() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("s");
    assert!(nvsbs(&["stats", "--ensemble", "2", "--out-dir", path(&dir)])
        .status
        .success());
    let out = nvsbs(&["sbs", "--config", path(&dir.join("manifest.json"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stats"));
}

#[test]
fn bad_input_fails_cleanly() {
    let root = tempfile::tempdir().unwrap();
    let out = nvsbs(&["fidelity", "--polarization", "2", "--out-dir", path(root.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("polarization"));
    assert!(!nvsbs(&["no-such-scenario"]).status.success());
}

#[test]
fn self_check_reports_every_quantity() {
    let root = tempfile::tempdir().unwrap();
    let out = nvsbs(&["self-check", "--out-dir", path(root.path())]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 7, "{text}");
}
