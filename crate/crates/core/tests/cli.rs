//! End-to-end runs of the `bosonvalid` binary.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use bosonvalid::cli::{RunManifest, EXIT_CAPACITY, EXIT_INCOMPATIBLE, EXIT_OK, EXIT_USAGE};

fn prepared() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let codes = common::run_cli_script(dir.path());
    assert!(
        codes
            .iter()
            .all(|&c| c == EXIT_OK || c == EXIT_INCOMPATIBLE),
        "{codes:?}"
    );
    dir
}

fn run(dir: &Path, args: &[&str]) -> i32 {
    common::run_cli(dir, args)
}

#[test]
fn every_command_is_byte_identical_across_reruns() {
    let a = prepared();
    let b = prepared();
    let fa = common::artifacts(a.path());
    let fb = common::artifacts(b.path());
    assert_eq!(fa.len(), fb.len());
    for ((na, ca), (nb, cb)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        assert!(ca == cb, "{na} differs between reruns");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = prepared();
    fs::copy(
        dir.path().join("exp.json"),
        dir.path().join("exp_default.json"),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bosonvalid"))
        .args(["experiment", "--spec", "spec.json", "--out", "exp1.json"])
        .env("BOSONVALID_JOBS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(
        run(
            dir.path(),
            &[
                "--jobs",
                "3",
                "experiment",
                "--spec",
                "spec.json",
                "--out",
                "exp3.json"
            ]
        ),
        EXIT_OK
    );
    let reference = fs::read(dir.path().join("exp_default.json")).unwrap();
    assert_eq!(fs::read(dir.path().join("exp1.json")).unwrap(), reference);
    assert_eq!(fs::read(dir.path().join("exp3.json")).unwrap(), reference);
}

#[test]
fn verdicts_map_to_exit_codes() {
    let dir = prepared();
    let d = dir.path();
    assert_eq!(
        run(
            d,
            &[
                "validate",
                "--reference",
                "a.jsonl",
                "--candidate",
                "b.jsonl",
                "--report",
                "r1.json"
            ]
        ),
        EXIT_OK
    );
    assert_eq!(
        run(
            d,
            &[
                "validate",
                "--reference",
                "a.jsonl",
                "--candidate",
                "c.jsonl",
                "--report",
                "r2.json"
            ]
        ),
        EXIT_INCOMPATIBLE
    );
    assert_eq!(
        run(
            d,
            &[
                "validate",
                "--reference",
                "a.jsonl",
                "--candidate",
                "unif.jsonl",
                "--voting",
                "1",
                "--report",
                "r3.json"
            ]
        ),
        EXIT_INCOMPATIBLE
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("r2.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "incompatible");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["no-such-command"]), EXIT_USAGE);
    assert_eq!(
        run(d, &["gen-unitary", "--modes", "0", "--out", "u.json"]),
        EXIT_USAGE
    );
    assert_eq!(
        run(
            d,
            &[
                "sample",
                "--unitary",
                "missing.json",
                "--input",
                "1",
                "--model",
                "ind",
                "--events",
                "5",
                "--out",
                "s.jsonl"
            ]
        ),
        EXIT_USAGE
    );
    assert_eq!(
        run(d, &["gen-unitary", "--modes", "4", "--out", "u.json"]),
        EXIT_OK
    );
    // input outside the interferometer
    assert_eq!(
        run(
            d,
            &[
                "sample",
                "--unitary",
                "u.json",
                "--input",
                "1,9",
                "--model",
                "ind",
                "--events",
                "5",
                "--out",
                "s.jsonl"
            ]
        ),
        EXIT_USAGE
    );
    assert_eq!(
        run(
            d,
            &[
                "sample",
                "--unitary",
                "u.json",
                "--input",
                "1,2",
                "--model",
                "ind",
                "--events",
                "5",
                "--out",
                "s.jsonl"
            ]
        ),
        EXIT_OK
    );
    // even number of voting trials
    assert_eq!(
        run(
            d,
            &[
                "validate",
                "--reference",
                "s.jsonl",
                "--candidate",
                "s.jsonl",
                "--voting",
                "2",
                "--k",
                "2"
            ]
        ),
        EXIT_USAGE
    );
}

#[test]
fn capacity_problems_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        run(d, &["gen-unitary", "--modes", "60", "--out", "u.json"]),
        EXIT_OK
    );
    // C(60, 8) exceeds the dense-distribution limit
    assert_eq!(
        run(
            d,
            &[
                "sample",
                "--unitary",
                "u.json",
                "--input",
                "1,2,3,4,5,6,7,8",
                "--model",
                "ind",
                "--events",
                "10",
                "--out",
                "s.jsonl"
            ]
        ),
        EXIT_CAPACITY
    );
    assert_eq!(
        run(d, &["gen-unitary", "--modes", "13", "--out", "v.json"]),
        EXIT_OK
    );
    assert_eq!(
        run(
            d,
            &[
                "sample",
                "--unitary",
                "v.json",
                "--input",
                "1,2,3",
                "--model",
                "ind",
                "--events",
                "30",
                "--out",
                "t.jsonl"
            ]
        ),
        EXIT_OK
    );
    // more clusters than distinct observed states
    assert_eq!(
        run(
            d,
            &[
                "validate",
                "--reference",
                "t.jsonl",
                "--candidate",
                "t.jsonl",
                "--k",
                "40"
            ]
        ),
        EXIT_CAPACITY
    );
}

#[test]
fn manifests_record_and_replay_runs() {
    let dir = prepared();
    let d = dir.path();
    let manifest = RunManifest::read(&d.join("a.jsonl.manifest.json")).unwrap();
    assert_eq!(manifest.command, "sample");
    assert_eq!(manifest.seed, Some(1));
    assert_eq!(manifest.artifacts, vec![Path::new("a.jsonl").to_path_buf()]);
    assert_eq!(
        run(d, &["replay", "a.jsonl.manifest.json", "--verify"]),
        EXIT_OK
    );
    assert_eq!(
        run(d, &["replay", "exp.json.manifest.json", "--verify"]),
        EXIT_OK
    );

    // a tampered artifact is regenerated and reported as a mismatch
    fs::write(d.join("u.json"), "{}").unwrap();
    assert_eq!(
        run(d, &["replay", "u.json.manifest.json", "--verify"]),
        EXIT_INCOMPATIBLE
    );
    assert_eq!(
        run(d, &["replay", "u.json.manifest.json", "--verify"]),
        EXIT_OK
    );

    assert_eq!(
        run(
            d,
            &[
                "--manifest",
                "custom.json",
                "gen-unitary",
                "--modes",
                "3",
                "--out",
                "w.json"
            ]
        ),
        EXIT_OK
    );
    assert!(d.join("custom.json").exists());
    assert!(!d.join("w.json.manifest.json").exists());
}

#[test]
fn experiment_writes_report_and_table() {
    let dir = prepared();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("exp.json")).unwrap()).unwrap();
    let matrix = &report["points"][0]["matrix"];
    assert_eq!(
        matrix["counts"][0][0].as_u64().unwrap()
            + matrix["counts"][0][1].as_u64().unwrap()
            + matrix["undecided"][0].as_u64().unwrap(),
        6
    );
    let table = fs::read_to_string(dir.path().join("exp.json.txt")).unwrap();
    assert!(table.contains("ind vs dis"));
}

#[test]
fn analyze_reports_have_headers_and_summaries() {
    let dir = prepared();
    for (csv, header) in [
        ("sorted.csv", "unitary"),
        ("cum.csv", ""),
        ("ball.csv", "unitary,role,outcome,k,P,Q,ratio"),
        ("corr.csv", ""),
    ] {
        let text = fs::read_to_string(dir.path().join(csv)).unwrap();
        assert!(
            text.starts_with(header),
            "{csv}: {}",
            text.lines().next().unwrap_or("")
        );
        assert!(text.lines().count() > 1, "{csv} is empty");
        assert!(
            dir.path().join(format!("{csv}.summary.json")).exists(),
            "{csv} lacks a summary"
        );
    }
}
