use std::fs;
use std::path::{Path, PathBuf};

use harness_cli::{run_command, Outcome};

const E_FREE: &str = r#"{
  "size": 4,
  "relations": {
    "R": { "domain": [0, 1, 2, 3], "classes": [[0, 1, 2], [3]] },
    "R1": { "domain": [0, 1, 2, 3], "classes": [[0, 1], [2], [3]] },
    "R2": { "domain": [0, 1, 2, 3], "classes": [[0], [1, 2], [3]] },
    "S": { "domain": [0, 1, 2, 3], "classes": [[0, 2], [1], [3]] }
  },
  "graphings": { "G": [[0, 1], [1, 2]] },
  "structure": { "relation": "R", "factors": ["R1", "R2"], "sub": "S", "subset": [0, 2, 3] }
}"#;

const E_CYCLE: &str = r#"{
  "size": 4,
  "relations": {
    "R": { "domain": [0, 1, 2, 3], "classes": [[0, 1, 2, 3]] },
    "R1": { "domain": [0, 1, 2, 3], "classes": [[0, 1], [2, 3]] },
    "R2": { "domain": [0, 1, 2, 3], "classes": [[1, 2], [0, 3]] },
    "C": { "domain": [0, 1, 2, 3], "classes": [[0], [1], [2], [3]] }
  },
  "structure": { "relation": "R", "factors": ["R1", "R2"], "core": "C" }
}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Outcome {
    run_command(std::iter::once("arbor").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn free_example_is_accepted_with_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "e-free.json", E_FREE);
    let out = run(&["verify-free", "--in", s(&inst)]);
    assert_eq!(out.code, 0, "{out:?}");
    assert!(out.stdout.starts_with("accept\n"));
    assert!(out.stdout.contains("\"kind\": \"free-product\""));
}

#[test]
fn cycle_example_is_rejected_with_its_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "e-cycle.json", E_CYCLE);
    let out = run(&["verify-free", "--in", s(&inst)]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("(0,1,2,3,0) tags (0,1,0,1)"), "{}", out.stdout);
    assert_eq!(run(&["verify-amalgam", "--in", s(&inst)]).code, 1);
    assert_eq!(run(&["bass-serre", "--in", s(&inst)]).code, 1);
    assert_eq!(run(&["kurosh", "--in", s(&inst), "--sub", "R"]).code, 1);
}

#[test]
fn rejection_certificates_check() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "e-cycle.json", E_CYCLE);
    let cert = dir.path().join("cert.json");
    assert_eq!(run(&["verify-free", "--in", s(&inst), "--out", s(&cert)]).code, 1);
    let out = run(&["check", "--cert", s(&cert)]);
    assert_eq!(out.code, 0, "{out:?}");
}

#[test]
fn kurosh_pipeline_checks() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", E_FREE);
    let cert = dir.path().join("cert.json");
    let out = run(&["kurosh", "--in", s(&inst), "--sub", "S", "--out", s(&cert)]);
    assert_eq!(out.code, 0, "{out:?}");
    let out = run(&["check", "--cert", s(&cert)]);
    assert_eq!(out.code, 0, "{out:?}");
    assert_eq!(out.stdout, "ok kurosh\n");
}

#[test]
fn tampering_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", E_FREE);
    let cert = dir.path().join("cert.json");
    run(&["kurosh", "--in", s(&inst), "--out", s(&cert)]);
    let text = fs::read_to_string(&cert).unwrap();
    let dropped = text.replace("\"treeing\": [\n    [\n      0,\n      2\n    ]\n  ]", "\"treeing\": []");
    assert_ne!(dropped, text);
    let bad = write(dir.path(), "bad.json", &dropped);
    assert_eq!(run(&["check", "--cert", s(&bad)]).code, 1);
    write(dir.path(), "inst.json", &E_FREE.replace("[[0, 2], [1], [3]]", "[[0], [1], [2], [3]]"));
    assert_eq!(run(&["check", "--cert", s(&cert)]).code, 2);
}

#[test]
fn restriction_and_treeing_certificates_check() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", E_FREE);
    let cert = dir.path().join("r.json");
    assert_eq!(run(&["restrict", "--in", s(&inst), "--restrict", "0,2", "--out", s(&cert)]).code, 0);
    assert_eq!(run(&["check", "--cert", s(&cert)]).code, 0);
    let cert = dir.path().join("t.json");
    assert_eq!(run(&["extract-treeing", "--in", s(&inst), "--graphing", "G", "--out", s(&cert)]).code, 0);
    assert_eq!(run(&["check", "--cert", s(&cert)]).code, 0);
    assert_eq!(run(&["extract-treeing", "--in", s(&inst), "--sub", "S", "--out", s(&cert)]).code, 0);
    assert_eq!(run(&["check", "--cert", s(&cert)]).code, 0);
}

#[test]
fn desingularize_reports_passing_checks() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", E_FREE);
    let out = run(&["desingularize", "--in", s(&inst)]);
    assert_eq!(out.code, 0, "{out:?}");
    assert!(out.stdout.contains("\"valid\": true"));
    assert_eq!(run(&["bass-serre", "--in", s(&inst)]).code, 0);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &E_FREE.replace("[[0, 1], [2], [3]]", "[[0, 1], [1], [3]]"));
    let out = run(&["validate", "--in", s(&bad)]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("repeats point 1"));
    assert_eq!(run(&["validate", "--in", "/nonexistent/x.json"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    let inst = write(dir.path(), "inst.json", E_FREE);
    assert_eq!(run(&["validate", "--in", s(&inst), "--format", "yaml"]).code, 2);
    assert_eq!(run(&["validate", "--in", s(&inst)]).code, 0);
}

#[test]
fn generation_is_deterministic() {
    let a = run(&["gen", "--seed", "7", "--size", "9", "--factors", "3"]);
    let b = run(&["gen", "--seed", "7", "--size", "9", "--factors", "3"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, run(&["gen", "--seed", "8", "--size", "9", "--factors", "3"]).stdout);
}

#[test]
fn batch_reports_in_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let free = write(dir.path(), "a.json", E_FREE);
    let cyc = write(dir.path(), "b.json", E_CYCLE);
    let out = run(&["batch", "--in", s(&cyc), s(&free)]);
    assert_eq!(out.code, 1);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert!(lines[0].starts_with(s(&cyc)) && lines[0].contains("\t1\treject"));
    assert!(lines[1].starts_with(s(&free)) && lines[1].contains("\t0\taccept"));
}
