//! End-to-end tests of the `invar` binary: exit codes, artifact round-trips,
//! determinism, and the failure paths.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn invar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

#[test]
fn unknown_group_is_a_usage_error() {
    let out = invar(&["roots", "--group", "Z9"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown group"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = invar(&["roots", "--group", "B3", "--frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn e8_pipeline_commands_require_the_opt_in_flag() {
    for cmd in ["canonicalize", "verify", "export"] {
        let out = invar(&[cmd, "--group", "E8", "--out", "/tmp/unused"]);
        assert_eq!(code(&out), 2, "{cmd} must refuse E8 without --heavy-ok");
        assert!(stderr(&out).contains("--heavy-ok"), "{cmd} stderr: {}", stderr(&out));
    }
    // Cheap E8 commands stay available.
    let out = invar(&["roots", "--group", "E8"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn replay_commands_need_an_output_directory() {
    for cmd in ["verify", "normalize", "export"] {
        let out = invar(&[cmd, "--group", "B3"]);
        assert_eq!(code(&out), 2, "{cmd} without --out must be a usage error");
        assert!(stderr(&out).contains("--out"), "{cmd} stderr: {}", stderr(&out));
    }
}

#[test]
fn verify_before_canonicalize_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = invar(&["verify", "--group", "B3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("canonicalize"), "stderr should point at the missing step");
}

#[test]
fn canonicalize_verify_normalize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();

    let out = invar(&["canonicalize", "--group", "B3", "--out", d]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(dir.path().join("b3_records.json").is_file());

    let out = invar(&["verify", "--group", "B3", "--out", d, "--format", "json"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["group"], "B3");
    assert_eq!(report["passed"], true);
    assert!(dir.path().join("b3_report.json").is_file());

    let out = invar(&["normalize", "--group", "B3", "--out", d]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("factor"));
    assert!(dir.path().join("b3_normalization.json").is_file());
}

#[test]
fn verify_rejects_records_for_a_different_group() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&invar(&["canonicalize", "--group", "B3", "--out", d])), 0);
    fs::rename(
        dir.path().join("b3_records.json"),
        dir.path().join("d4_records.json"),
    )
    .unwrap();
    let out = invar(&["verify", "--group", "D4", "--out", d]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("B3"), "stderr: {}", stderr(&out));
}

#[test]
fn tampered_records_fail_verification_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&invar(&["canonicalize", "--group", "D4", "--out", d])), 0);

    let path = dir.path().join("d4_records.json");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    v["records"][3]["z"][2] = serde_json::Value::String("99999".into());
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();

    let out = invar(&["verify", "--group", "D4", "--out", d, "--format", "json"]);
    assert_eq!(code(&out), 1, "tampered records must fail verification");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["passed"], false);
    // The report is still written for inspection.
    let on_disk = fs::read_to_string(dir.path().join("d4_report.json")).unwrap();
    assert!(on_disk.contains("\"fail\""));
}

fn artifact_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn exported_artifacts_are_byte_identical_across_runs() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    for dir in [&dir1, &dir2] {
        let d = dir.path().to_str().unwrap();
        assert_eq!(code(&invar(&["export", "--group", "D4", "--out", d])), 0);
        assert_eq!(code(&invar(&["verify", "--group", "D4", "--out", d, "--seed", "5"])), 0);
    }
    let a = artifact_bytes(dir1.path());
    let b = artifact_bytes(dir2.path());
    assert_eq!(a.len(), 7, "expected seven artifacts, got {:?}", a.iter().map(|(n, _)| n).collect::<Vec<_>>());
    assert_eq!(a, b, "artifacts differ between identical runs");
}

#[test]
fn stdout_json_parses_for_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["basis", "--group", "B3", "--format", "json"],
        vec!["roots", "--group", "B3", "--format", "json"],
        vec!["canonicalize", "--group", "B3", "--format", "json", "--out", d],
        vec!["normalize", "--group", "B3", "--format", "json", "--out", d],
        vec!["verify", "--group", "B3", "--format", "json", "--out", d],
        vec!["export", "--group", "B3", "--format", "json", "--out", d],
    ] {
        let out = invar(&args);
        assert_eq!(code(&out), 0, "{args:?} stderr: {}", stderr(&out));
        let parsed: Result<serde_json::Value, _> = serde_json::from_str(&stdout(&out));
        assert!(parsed.is_ok(), "{args:?} did not print valid JSON");
    }
}

#[test]
fn progress_goes_to_stderr_not_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = invar(&["canonicalize", "--group", "B3", "--out", d, "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert!(!stderr(&out).is_empty(), "expected progress lines on stderr");
    // stdout must stay machine-readable.
    serde_json::from_str::<serde_json::Value>(&stdout(&out)).unwrap();
}

#[test]
fn thread_hint_must_be_positive() {
    let out = invar(&["roots", "--group", "B3", "--threads", "0"]);
    assert_eq!(code(&out), 2);
}
