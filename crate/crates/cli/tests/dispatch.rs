use std::path::Path;

use wpspine_cli::manifest::{sha256_hex, RunManifest};
use wpspine_cli::{dispatch, Io};

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("wpspine").chain(args.iter().copied());
    let code = dispatch(argv, &mut Io { stdout: &mut out, stderr: &mut err });
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run.json")).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["volume", "--n", "3", "--cusps", "01"]).0, 2);
    assert_eq!(run(&["volume", "--n", "3", "--cusps", "0x1"]).0, 2);
    assert_eq!(run(&["reproduce", "--set", "no_such_key=1"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn volume_prints_json_and_manifest() {
    let (code, out, err) = run(&["volume", "--n", "3", "--cusps", "000"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_object());
    let m: RunManifest = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(m.command, "volume");
    assert_eq!(m.outputs[0].sha256, sha256_hex(out.as_bytes()));
}

#[test]
fn three_boundary_anti_trees() {
    let (code, out, _) = run(&["trees", "--n", "3", "--anti"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let records = v.as_array().or_else(|| v["trees"].as_array()).expect("tree list");
    assert_eq!(records.len(), 5);
}

#[test]
fn sample_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut digests = Vec::new();
    for sub in ["a", "b"] {
        let path = dir.path().join(sub).join("hist.csv");
        let args = ["sample", "--n", "3", "--lengths", "0,0,1", "--count", "2000", "--seed", "11", "--out", path.to_str().unwrap()];
        let (code, _, err) = run(&args);
        assert_eq!(code, 0, "{err}");
        let csv = std::fs::read(&path).unwrap();
        assert!(String::from_utf8_lossy(&csv).starts_with("bin_left,bin_right,count"));
        let m = manifest(path.parent().unwrap());
        assert_eq!(m.seed, Some(11));
        let own = m.outputs.iter().find(|o| o.path.ends_with("hist.csv")).unwrap();
        assert_eq!(own.sha256, sha256_hex(&csv));
        digests.push(own.sha256.clone());
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn tightened_tolerance_fails_and_names_the_criterion() {
    let (code, out, err) = run(&["reproduce", "--only", "5", "--set", "c5_rel=1e-300"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL"));
    assert!(err.contains("5 (three-point function order 0/1)"), "{err}");
}

#[test]
fn reproduce_single_criterion_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let (code, out, err) = run(&["reproduce", "--only", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("all 1 criteria passed"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(report["all_passed"], true);
    assert_eq!(manifest(dir.path()).command, "reproduce");
}

#[test]
fn verify_shears_passes() {
    let (code, out, err) = run(&["verify", "--what", "shears", "--seed", "3", "--trials", "20"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("PASS") && !out.contains("FAIL"));
}
