use std::path::PathBuf;
use std::process::{Command, Output};

fn cfe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfe")).args(args).output().expect("cfe runs")
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_on_four_cycle_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.jsonl");
    let o = cfe(&["run", "--graph", &fixture("cycle4.graph"), "--starts", "0,2", "--wake", "0,5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("collisions: 0"));
    let text = std::fs::read_to_string(&out).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["header"]["starts"], serde_json::json!([0, 2]));
    assert!(text.lines().count() > 2);
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let paths = ["a.jsonl", "b.jsonl"].map(|n| dir.path().join(n));
    for p in &paths {
        let o = cfe(&["run", "--gen", "random:5", "--seed", "9", "--starts", "1,3", "--wake", "2,0", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn malformed_graph_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.graph");
    std::fs::write(&g, "3 2\n0 0 1 0\n1 x 2 0\n").unwrap();
    let o = cfe(&["run", "--graph", g.to_str().unwrap(), "--starts", "0,2"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn equal_starts_are_rejected() {
    let o = cfe(&["run", "--graph", &fixture("cycle4.graph"), "--starts", "1,1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("distinct"));
}

#[test]
fn two_node_graph_is_rejected_for_protocol_runs() {
    let o = cfe(&["run", "--gen", "path:2", "--starts", "0,1", "--n", "3"]);
    assert!(!o.status.success());
}

#[test]
fn sweep_passes_and_mutant_fails_with_replayable_witness() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("n3.json");
    let o = cfe(&["sweep", "--n", "3", "--out", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["scenarios"], 720);

    let report = dir.path().join("mutant.json");
    let o = cfe(&[
        "sweep", "--n", "4", "--mutation", "drop-terminal-wait", "--stop-at-first-failure", "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let g = dir.path().join("mutant.failure.graph");
    let side = dir.path().join("mutant.failure.scenario.json");
    let o = cfe(&["replay", "--graph", g.to_str().unwrap(), "--scenario", side.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn uxs_verify_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("n3.seq");
    let o = cfe(&["uxs", "gen", "--n", "3", "--out", seq.to_str().unwrap()]);
    assert!(o.status.success());
    let o = cfe(&["uxs", "verify", "--seq", seq.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = cfe(&["uxs", "verify", "--seq", seq.to_str().unwrap(), "--n", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample"));
}

#[test]
fn demos_demonstrate() {
    for args in [&["demo", "k2", "--max", "5"][..], &["demo", "star", "--max", "3"], &["demo", "ring", "--max", "4"]] {
        let o = cfe(args);
        assert!(o.status.success(), "{args:?}: {}", stdout(&o));
    }
}
