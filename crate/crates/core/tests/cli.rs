use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn rankloss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankloss"))
        .args(args)
        .env_remove("RANKLOSS_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixtures() -> (TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let orig = file(&dir, "orig.csv", "a,b\n1,10\n3,30\n2,20\n2,5\n");
    let masked = file(&dir, "masked.csv", "a,b\n3,10\n1,30\n2,20\n2,5\n");
    (dir, orig, masked)
}

#[test]
fn rank_breaks_ties_by_position() {
    let (_d, orig, _) = fixtures();
    let o = rankloss(&["rank", s(&orig)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "a,b\n1,2\n4,4\n2,3\n3,1\n");
}

#[test]
fn random_tie_break_needs_a_seed() {
    let (_d, orig, _) = fixtures();
    assert_eq!(rankloss(&["rank", s(&orig), "--tie-break", "random"]).status.code(), Some(2));
    let a = rankloss(&["rank", s(&orig), "--tie-break", "random", "--seed", "4"]);
    let b = rankloss(&["rank", s(&orig), "--tie-break", "random", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn metrics_report_values() {
    let (_d, orig, masked) = fixtures();
    let o = rankloss(&["metrics", s(&orig), s(&masked)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("metric,value\n"));
    // Column a: ranks (1,4,2,3) vs (4,1,2,3) -> 6 of max 8; column b unchanged.
    assert!(out.contains("brmae,3.7500000000000000e-1\n"));
    assert!(out.contains("brmse,4.5000000000000001e-1\n"));
    assert!(out.contains("il1_skipped_cells,0\n"));
}

#[test]
fn shape_mismatch_is_a_usage_error_naming_both_shapes() {
    let (dir, orig, _) = fixtures();
    let short = file(&dir, "short.csv", "a\n1\n2\n");
    let o = rankloss(&["metrics", s(&orig), s(&short)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("4x2") && err.contains("2x1"), "{err}");
}

#[test]
fn bad_data_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = file(&dir, "bad.csv", "a\n1\nx\n");
    let o = rankloss(&["rank", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row 2"));
    let missing = dir.path().join("nope.csv");
    assert_eq!(rankloss(&["rank", s(&missing)]).status.code(), Some(1));
}

#[test]
fn mask_prints_spec_and_requires_seed_for_stochastic_methods() {
    let (_d, orig, _) = fixtures();
    assert_eq!(
        rankloss(&["mask", s(&orig), "--method", "noise", "--param", "10"]).status.code(),
        Some(2)
    );
    let o = rankloss(&["mask", s(&orig), "--method", "rankswap", "--param", "0.5", "--seed", "1"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("method=rankswap parameter=0.5 seed=1"));
    assert!(stdout(&o).starts_with("a,b\n"));

    let m = rankloss(&["mask", s(&orig), "--method", "mdav", "--param", "4"]);
    assert!(m.status.success());
    assert_eq!(stdout(&m), "a,b\n2,16.25\n2,16.25\n2,16.25\n2,16.25\n");
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let (_d, orig, _) = fixtures();
    for args in [
        ["mask", s(&orig), "--method", "mdav", "--param", "7"],
        ["mask", s(&orig), "--method", "mdav", "--param", "1.5"],
        ["mask", s(&orig), "--method", "rankswap", "--param", "1.5"],
        ["mask", s(&orig), "--method", "shuffle", "--param", "1"],
    ] {
        assert_eq!(rankloss(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn replicating_mdav_is_rejected() {
    let (_d, orig, _) = fixtures();
    let o = rankloss(&["replicate", s(&orig), "--method", "mdav", "--count", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("deterministic"));
}

#[test]
fn grid_writes_prefixed_files_and_echoes_custom_grid() {
    let (dir, orig, _) = fixtures();
    let prefix = dir.path().join("run");
    let o = rankloss(&[
        "grid", s(&orig), "--method", "mdav", "--grid-to", "3", "--out", s(&prefix), "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("3 values from 1 to 3"));
    let metrics = fs::read_to_string(format!("{}.metrics.csv", s(&prefix))).unwrap();
    assert_eq!(metrics.lines().count(), 1 + 3 * 8);
    let summary = fs::read_to_string(format!("{}.spearman.csv", s(&prefix))).unwrap();
    assert!(summary.starts_with("kind,metric,against,spearman\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(format!("{}.json", s(&prefix))).unwrap()).unwrap();
    assert_eq!(json["grid"].as_array().unwrap().len(), 3);
}

#[test]
fn json_requires_out() {
    let (_d, orig, _) = fixtures();
    assert_eq!(
        rankloss(&["grid", s(&orig), "--method", "mdav", "--json"]).status.code(),
        Some(2)
    );
}

#[test]
fn oracle_enumerates_small_n_only() {
    let o = rankloss(&["oracle", "--n", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 7);
    assert!(stderr(&o).contains("3 distinct absolute distances, 4 distinct squared distances"));
    assert_eq!(rankloss(&["oracle", "--n", "9"]).status.code(), Some(2));
    assert_eq!(rankloss(&["oracle", "--n", "50", "--sample", "10"]).status.code(), Some(2));
    let sampled = rankloss(&["oracle", "--n", "50", "--sample", "10", "--seed", "2"]);
    assert!(sampled.status.success());
    assert_eq!(stdout(&sampled).lines().count(), 13);
}

#[test]
fn jobs_environment_variable_is_validated() {
    let (_d, orig, _) = fixtures();
    let o = Command::new(env!("CARGO_BIN_EXE_rankloss"))
        .args(["grid", s(&orig), "--method", "mdav"])
        .env("RANKLOSS_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
