use std::path::Path;
use std::process::{Command, Output};

fn landau(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landau"))
        .args(args)
        .env("LANDAU_CACHE_DIR", cache)
        .output()
        .unwrap()
}

#[test]
fn run_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cache = dir.path().join("cache");
    let o = landau(&["run", "--n", "8", "--L", "4", "--T", "0.05", "--out", out.to_str().unwrap()], &cache);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for file in ["series.csv", "config.json", "final.bin", "final.bin.json"] {
        assert!(out.join(file).exists(), "{file}");
    }
    let echo: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["config"]["n"], 8);
    assert_eq!(echo["q"], 27.0);
    assert!(std::fs::read_dir(&cache).unwrap().count() > 0);

    let final_bin = out.join("final.bin");
    let o = landau(&["verify", final_bin.to_str().unwrap()], &cache);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let o = landau(&["run", "--gamma", "0.1"], &cache);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma must lie in [-2, 0)"));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = landau(&["run", "--n", "8", "--T", "0", "--out", blocker.join("sub").to_str().unwrap()], &cache);
    assert_eq!(o.status.code(), Some(4));

    let o = landau(&["verify", dir.path().join("missing.bin").to_str().unwrap()], &cache);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn experiment_with_a_custom_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("exp");
    let matrix = dir.path().join("matrix.json");
    std::fs::write(
        &matrix,
        r#"[{"name": "tiny", "config": {"n": 8, "L": 4.0, "gamma": -1.0, "T": 0.1}}]"#,
    )
    .unwrap();
    let o = landau(
        &["experiment", "--matrix", matrix.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &cache,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("tiny.csv").exists());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert!(report["rows"].as_array().unwrap().iter().all(|r| r["run"] == "tiny"));
    assert!(std::fs::read_to_string(out.join("report.md")).unwrap().contains("tiny"));
}

#[test]
fn empty_report_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    landau_cli::commands::write_report(&landau_core::harness::Report::default(), dir.path()).unwrap();
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 0);
}
