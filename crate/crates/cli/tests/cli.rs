//! End-to-end runs of the binary: exit codes, error records and artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn dyadic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadic")).args(args).env("DYADIC_WORKERS", "1").output().unwrap()
}

fn error_kind(out: &Output) -> String {
    let line = String::from_utf8_lossy(&out.stderr);
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap_or_else(|_| panic!("not JSON: {line}"));
    v["error"].as_str().unwrap().to_string()
}

fn build(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["build", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    dyadic(&args)
}

#[test]
fn relaxed_build_verifies_with_bridge_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("b");
    assert!(build(&dir, &["--space", "interval:257"]).status.success());
    for f in ["manifest.json", "bundle.json", "hierarchy.json", "parents.json", "cubes.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let out = dyadic(&["verify", "--dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report-verify.json")).unwrap()).unwrap();
    assert_eq!(rep["families"]["net"], true);
    assert_eq!(rep["families"]["t1_to_t3"], true);
    assert_eq!(rep["families"]["d"], true);
}

#[test]
fn strict_build_with_given_constants_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    let given = ["--space", "interval:257", "--mode", "strict", "--gamma", "2", "--n-pack", "2", "--c-star", "1"];
    assert!(build(&dir, &given).status.success());
    let out = dyadic(&["verify", "--dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn strict_mode_rejects_large_ratio_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("x");
    let out = build(&dir, &["--space", "interval:33", "--mode", "strict", "--gamma", "2", "--n-pack", "2", "--r", "0.25"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "Construction");
    let out = build(&dir, &["--space", "interval:33", "--mode", "strict", "--alpha6", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.exists());
}

#[test]
fn missing_and_corrupt_artifacts_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("none");
    let out = dyadic(&["verify", "--dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "MissingArtifact");

    let dir = tmp.path().join("c");
    assert!(build(&dir, &["--space", "interval:65"]).status.success());
    std::fs::write(dir.join("parents.json"), "{\"schema\": \"wrong\"}").unwrap();
    let out = dyadic(&["verify", "--dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "CorruptArtifact");
}

#[test]
fn missing_input_file_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("o");
    let missing = tmp.path().join("absent.txt");
    let out = build(&dir, &["--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "Io");
    assert!(!dir.exists());
}

#[test]
fn point_file_input_and_graph_export() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("pts.txt");
    let text: String = (0..40).map(|i| format!("{} {}\n", i as f64 / 39.0, 0.5 * (i % 2) as f64 / 39.0)).collect();
    std::fs::write(&input, format!("# zigzag\n{text}")).unwrap();
    let dir = tmp.path().join("p");
    let out = build(&dir, &["--input", input.to_str().unwrap(), "--format", "points"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("input.txt").exists());
    let dest = tmp.path().join("g.txt");
    let out = dyadic(&["export-graph", "--dir", dir.to_str().unwrap(), "--level", "1", "--output", dest.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let graph = std::fs::read_to_string(&dest).unwrap();
    assert!(graph.lines().any(|l| l.starts_with("node")));
}
