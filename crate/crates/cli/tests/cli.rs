//! End-to-end tests of the `sds` binary: exit codes, report determinism, and
//! the synth → rank → stats → eval pipeline on disk.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sds(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sds"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_rank_stats_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_ok(&sds(&["synth", "--out", "scenes", "--count", "6", "--seed", "11"], d));
    assert!(d.join("scenes/manifest.json").exists());

    // ranking a manifest twice gives byte-identical reports
    assert_ok(&sds(
        &["rank", "--manifest", "scenes/manifest.json", "--categories", "6", "--out", "a.json"],
        d,
    ));
    assert_ok(&sds(
        &["rank", "--manifest", "scenes/manifest.json", "--categories", "6", "--out", "b.json"],
        d,
    ));
    let a = fs::read(d.join("a.json")).unwrap();
    let b = fs::read(d.join("b.json")).unwrap();
    assert_eq!(a, b);

    // the ranked output matches the generator's expected tables
    let expected = fs::read_to_string(d.join("scenes/expected_ranks.json")).unwrap();
    let got = String::from_utf8(a).unwrap();
    let expected: serde_json::Value = serde_json::from_str(&expected).unwrap();
    let got: serde_json::Value = serde_json::from_str(&got).unwrap();
    assert_eq!(expected, got);

    assert_ok(&sds(
        &["stats", "scenes/manifest.json", "--categories", "6", "--out", "reports"],
        d,
    ));
    let csv = fs::read_to_string(d.join("reports/distribution.csv")).unwrap();
    assert!(csv.starts_with("categories,c1,c2,c3,c4,c5,c6"));
    assert!(d.join("reports/distribution.svg").exists());

    assert_ok(&sds(
        &[
            "cooccur", "scenes/manifest.json", "--categories", "6", "--focus", "c1", "--out",
            "reports",
        ],
        d,
    ));
    assert!(d.join("reports/cooccurrence_counts.csv").exists());
    assert!(d.join("reports/cooccurrence_precedence.csv").exists());
    assert!(d.join("reports/case_study_c1.csv").exists());
}

#[test]
fn rank_single_image_emits_json_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_ok(&sds(&["synth", "--out", "s", "--count", "1", "--seed", "4"], d));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("s/manifest.json")).unwrap()).unwrap();
    let rec = &manifest["records"][0];
    let sem = format!("s/{}", rec["semantic"].as_str().unwrap());
    let sal = format!("s/{}", rec["saliency"].as_str().unwrap());
    let out = sds(
        &[
            "rank", "--sem", &sem, "--sal", &sal, "--id", "img0", "--tau", "0.5", "--categories",
            "6",
        ],
        d,
    );
    assert_ok(&out);
    let v: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is a JSON rank table");
    assert_eq!(v["image"], "img0");
    assert!(v["entries"].as_array().unwrap().len() >= 2);
    assert_eq!(v["entries"][0]["rank_position"], 1);
}

#[test]
fn eval_against_self_is_perfect_for_segmentation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_ok(&sds(&["synth", "--out", "s", "--count", "4", "--seed", "9"], d));
    let out = sds(
        &[
            "eval-sem",
            "--pred",
            "s/manifest.json",
            "--gt",
            "s/manifest.json",
            "--categories",
            "6",
            "--format",
            "json",
        ],
        d,
    );
    assert_ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pixel_acc"], 1.0);
    assert_eq!(v["mean_iou"], 1.0);
}

#[test]
fn train_writes_checkpoint_and_decreasing_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("run.cfg"),
        "variant = v1\nsteps = 40\nlr = 0.1\nseed = 3\n",
    )
    .unwrap();
    assert_ok(&sds(&["train", "--config", "run.cfg", "--out", "run"], d));
    assert!(d.join("run/checkpoint_v1.bin").exists());
    assert!(d.join("run/checkpoint_v1.json").exists());
    let trace = fs::read_to_string(d.join("run/loss.csv")).unwrap();
    let losses: Vec<f64> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(losses.len(), 40);
    assert!(losses.last().unwrap() < losses.first().unwrap());
}

#[test]
fn gradcheck_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = sds(&["gradcheck", "--variant", "v3", "--slim"], dir.path());
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("v3 PASS max_rel_err="), "{}", text);
}

#[test]
fn exit_codes_distinguish_validation_from_io() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // missing manifest file -> I/O error -> exit 2
    let out = sds(&["stats", "nowhere/manifest.json"], d);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // bad flag value -> validation error -> exit 1
    assert_ok(&sds(&["synth", "--out", "s", "--count", "1", "--seed", "2"], d));
    let out = sds(
        &["rank", "--manifest", "s/manifest.json", "--categories", "6", "--tau", "1.5"],
        d,
    );
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));

    // unknown subcommand -> usage error -> exit 1
    let out = sds(&["frobnicate"], d);
    assert_eq!(out.status.code(), Some(1));

    // help -> exit 0
    let out = sds(&["--help"], d);
    assert_eq!(out.status.code(), Some(0));
}
