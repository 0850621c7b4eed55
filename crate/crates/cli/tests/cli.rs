use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(format!("{name}.json"))
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn locc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locc")).args(args).output().unwrap()
}

fn run_fixture(name: &str, extra: &[&str]) -> Output {
    let f = fixture(name);
    let mut args = vec!["run", f.to_str().unwrap()];
    args.extend_from_slice(extra);
    locc(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bennett9_exits_with_no_locc() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = run_fixture("bennett9", &["--max-rounds", "10", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("NO_LOCC_ANY_ROUNDS"));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["verdict"], "NO_LOCC_ANY_ROUNDS");
    assert_eq!(r["outcomes"], 9);
    assert!(r["protocol"].is_null());
}

#[test]
fn product_basis_writes_double_rooted_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("t.dot");
    let o = run_fixture("product_basis_2x2", &["--max-rounds", "4", "--dot", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(dot).unwrap();
    assert!(dot.contains("rankdir=LR"));
    assert!(dot.contains("= I_A"));
    assert!(dot.contains("= I_B"));
}

#[test]
fn example4_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("t.dot");
    let proto = dir.path().join("t.txt");
    let o = run_fixture(
        "example4",
        &["--max-rounds", "6", "--dot", dot.to_str().unwrap(), "--protocol", proto.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dot).unwrap(), golden("example4.dot"));
    assert_eq!(std::fs::read_to_string(proto).unwrap(), golden("example4.protocol.txt"));
}

#[test]
fn reports_are_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("r{i}.json"));
        let o = run_fixture("example5", &["--report", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let text = std::fs::read_to_string(path).unwrap();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        assert!(v["timing"]["wall_ms"].is_number());
        v.as_object_mut().unwrap().remove("timing");
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        reports.push((serde_json::to_string(&v).unwrap(), keys));
    }
    assert_eq!(reports[0], reports[1]);
    // timing is the only non-deterministic field and it comes last
    let text = std::fs::read_to_string(dir.path().join("r0.json")).unwrap();
    let before_timing = text.split("\"timing\"").next().unwrap();
    let other = std::fs::read_to_string(dir.path().join("r1.json")).unwrap();
    assert!(other.starts_with(before_timing));
}

#[test]
fn example5_report_has_eight_leaves() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = run_fixture("example5", &["--report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(r["protocol"]["leaves"], 8);
    assert_eq!(r["instrument"]["passed"], true);
    assert!(r["instrument"]["completeness_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn input_errors_exit_one() {
    let o = run_fixture("bad_fraction", &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("\"1/0\"") && err.contains("(0, 0)"), "{err}");

    let o = run_fixture("non_psd", &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("outcome 3, side B") && err.contains("positive semidefinite"), "{err}");

    let o = locc(&["run", "/nonexistent/file.json"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run_fixture("example1", &["--max-rounds", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn capped_search_exits_three() {
    let o = run_fixture("bennett9", &["--max-trees", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("INCONCLUSIVE_CAPPED"));
}

#[test]
fn fixture_command_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = locc(&["fixture", "bennett9", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(out).unwrap(), std::fs::read_to_string(fixture("bennett9")).unwrap());
    assert_eq!(locc(&["fixture", "nope"]).status.code(), Some(1));
}
