mod common;

use common::*;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .env_remove("MEROS_VERIFY_COLOR")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    fixture_path(name).display().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

/// Runtime snapshot with `/magician1/aruco_node` running under another name.
fn renamed_snapshot(dir: &Path) -> String {
    let text = read_fixture("runtime.json").replace("/magician1/aruco_node", "/magician1/aruco");
    let path = dir.join("renamed.json");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const VISION: &str = "Unloading manipulator/Vision System";

#[test]
fn scoped_check_of_conforming_subsystem_passes() {
    let out = run(&["verify", "--model", &fixture("model.json"), "--snapshot", &fixture("runtime.json"), "--stage", "ssrve", "--scope", VISION]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with(&format!("== ssrve :: {VISION} :: PASS ==")));
    assert!(text.contains("0 error(s), 0 warning(s)"));
}

#[test]
fn renamed_node_is_reported_with_a_hint() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = renamed_snapshot(dir.path());
    let base = ["verify", "--model", &fixture("model.json"), "--snapshot", &snapshot, "--stage", "ssrve", "--scope", VISION];

    let out = run(&base);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("MissingNode"));
    assert!(text.contains("note: /magician1/aruco may be /magician1/aruco_node under a different name"));

    let mut args = base.to_vec();
    args.extend(["--format", "json"]);
    let report = json(&run(&args));
    let findings = report["findings"].as_array().unwrap();
    assert_eq!(findings.len(), 2);
    assert_eq!(findings[0]["class"], "MissingNode");
    assert_eq!(findings[0]["severity"], "error");
    assert_eq!(findings[0]["subject"], "/magician1/aruco_node");
    assert_eq!(findings[1]["class"], "UnexpectedNode");
    assert_eq!(findings[1]["severity"], "warning");
    assert_eq!(findings[1]["subject"], "/magician1/aruco");
    assert_eq!(report["pass"], false);
}

#[test]
fn sibling_scope_is_unaffected_by_rename() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = renamed_snapshot(dir.path());
    let out = run(&[
        "verify", "--model", &fixture("model.json"), "--snapshot", &snapshot, "--stage", "ssrve",
        "--scope", "Unloading manipulator/Dobot Magician System",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn missing_snapshot_is_a_usage_error() {
    let out = run(&["verify", "--model", &fixture("model.json"), "--stage", "ssrve", "--scope", VISION]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.starts_with("meros-verify: "), "{err}");
    assert_eq!(err.lines().count(), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_arguments_exit_2() {
    for args in [
        vec!["verify"],
        vec!["frobnicate"],
        vec!["verify", "--model", "x.json", "--stage", "nope"],
        vec!["verify", "--model", "/does/not/exist.json", "--stage", "model"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert_eq!(stderr(&out).lines().count(), 1, "{args:?}");
    }
    let out = run(&["verify", "--model", &fixture("model.json"), "--snapshot", &fixture("runtime.json"), "--stage", "ssrve", "--scope", "Nowhere"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Nowhere"));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("meros-verify "));
}

#[test]
fn check_model_passes_on_fixture() {
    let out = run(&["check-model", "--model", &fixture("model.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("== model :: / :: PASS =="));
}

#[test]
fn full_verification_reports_every_stage() {
    let out = run(&[
        "verify", "--model", &fixture("model.json"), "--snapshot", &fixture("runtime.json"),
        "--sources", &fixture("sources.json"), "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let reports = json(&out);
    let stages: Vec<&str> = reports.as_array().unwrap().iter().map(|r| r["stage"].as_str().unwrap()).collect();
    assert_eq!(stages.first(), Some(&"model"));
    assert_eq!(stages.iter().filter(|s| **s == "ssrve").count(), 6);
    assert!(stages.contains(&"srve") && stages.contains(&"sources"));
    for report in reports.as_array().unwrap() {
        let keys: Vec<&String> = report.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["stage", "scope", "pass", "findings"]);
    }
}

#[test]
fn out_writes_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = run(&[
        "verify", "--model", &fixture("model.json"), "--snapshot", &fixture("runtime.json"), "--stage", "srve",
        "--format", "json", "--out", &target.display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(report["stage"], "srve");
    assert_eq!(report["pass"], true);
}

#[test]
fn ignore_pattern_suppresses_findings() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = renamed_snapshot(dir.path());
    let args = ["verify", "--model", &fixture("model.json"), "--snapshot", &snapshot, "--stage", "srve", "--format", "json"];
    let before = json(&run(&args));
    assert!(!before["findings"].as_array().unwrap().is_empty());

    let mut ignored = args.to_vec();
    ignored.extend(["--ignore", "/magician1/aruco*"]);
    let out = run(&ignored);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn validate_accepts_fixture_traces() {
    for (trace, plan) in [("loading", "loading"), ("unloading", "unloading"), ("supporting", "supporting"), ("obstacle", "obstacle")] {
        let out = run(&["validate", "--model", &fixture("model.json"), "--trace", &fixture(&format!("traces/{trace}.jsonl")), "--plan", plan]);
        assert_eq!(out.status.code(), Some(0), "{plan}: {}", stdout(&out));
        assert!(stdout(&out).contains(&format!("plan {plan}: matched")));
    }
    let out = run(&[
        "validate", "--model", &fixture("model.json"), "--trace", &fixture("traces/loading.jsonl"), "--plan", "unloading",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn matrix_json_has_a_row_per_requirement() {
    let out = run(&[
        "matrix", "--model", &fixture("model.json"), "--snapshot", &fixture("runtime.json"),
        "--sources", &fixture("sources.json"), "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let ids: Vec<&str> = rows.iter().map(|r| r["requirement_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["R1", "R2", "R3", "R4", "R5", "R6"]);
    for row in rows {
        assert_eq!(row["verification_status"]["srve"], "pass");
        assert_eq!(row["verification_status"]["scenarios"], "unverified");
    }
}

#[test]
fn all_combines_reports_and_matrix() {
    let out = run(&[
        "all", "--model", &fixture("model.json"), "--snapshot", &fixture("runtime.json"),
        "--sources", &fixture("sources.json"), "--trace", &fixture("traces/full_scenario.jsonl"), "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let value = json(&out);
    let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["reports", "matrix"]);
    for row in value["matrix"].as_array().unwrap() {
        assert_eq!(row["verification_status"]["scenarios"], "pass", "{row}");
    }
}

#[test]
fn missing_node_fails_r6_in_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let mut snapshot = runtime();
    snapshot.nodes.retain(|n| n.fqn != "/minilynx1/bt_navigator");
    let path = dir.path().join("no_nav.json");
    std::fs::write(&path, meros_verify::snapshot::serialize_runtime_snapshot(&snapshot)).unwrap();
    let out = run(&["matrix", "--model", &fixture("model.json"), "--snapshot", &path.display().to_string(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let rows = json(&out);
    let r6 = rows.as_array().unwrap().iter().find(|r| r["requirement_id"] == "R6").unwrap();
    assert_eq!(r6["verification_status"]["srve"], "fail");
}

#[test]
fn color_follows_environment() {
    let args = ["check-model", "--model", &fixture("model.json")];
    let plain = run(&args);
    assert!(!stdout(&plain).contains('\x1b'));
    let colored = Command::new(binary()).args(args).env("MEROS_VERIFY_COLOR", "always").output().unwrap();
    assert!(stdout(&colored).contains("\x1b[32;1mPASS"));
}

#[test]
fn model_json_fixture_is_canonical() {
    let text = read_fixture("model.json");
    assert_eq!(meros_verify::model::serialize_model(&model()), text);
}
