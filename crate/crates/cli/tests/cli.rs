use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn cycle_text(n: usize) -> String {
    let edges: String = (0..n).map(|i| format!("({},{}) ({},{}) ", i, (i + 1) % n, (i + 1) % n, i)).collect();
    format!("sig {{ E/2 }}\ndom {n}\nE: {edges}\n")
}

fn fomet(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_fomet")).args(args).output().unwrap();
    let value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), value)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_summarizes_a_structure() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.fms", &cycle_text(5));
    let (code, v) = fomet(&["validate", s(&f)]);
    assert_eq!(code, 0);
    assert_eq!(v["size"], 5);
    assert_eq!(v["degree"], 2);
    assert_eq!(v["relations"][0]["tuples"], 10);
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.fms", "sig { E/2 } dom 2 E: (0,5)");
    assert_eq!(fomet(&["validate", s(&f)]).0, 2);
    assert_eq!(fomet(&["validate", "/no/such/file.fms"]).0, 2);
}

#[test]
fn pipeline_certifies_long_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.fms", &cycle_text(5000));
    let b = write(dir.path(), "b.fms", &cycle_text(5001));
    let (code, v) = fomet(&["pipeline", s(&a), s(&b), "--k", "1", "--matches", "100"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["duplicator_wins"], true);
    assert_eq!(v["lemma_envpres"]["holds"], true);
}

#[test]
fn pipeline_rejects_a_pure_set() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.fms", &cycle_text(5000));
    let b = write(dir.path(), "b.fms", "sig { E/2 }\ndom 5000\n");
    let (code, v) = fomet(&["pipeline", s(&a), s(&b), "--k", "1"]);
    assert_eq!(code, 3);
    assert!(v["message"].as_str().unwrap().contains("hypothesis of Theorem 1 pipeline not met"));
}

#[test]
fn ordered_sets_are_separated_at_rank_three() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.fms", "sig { } dom 2");
    let b = write(dir.path(), "b.fms", "sig { } dom 3");
    let (code, v) = fomet(&["game", s(&a), s(&b), "--k", "3", "--identity"]);
    assert_eq!(code, 0);
    assert_eq!(v["duplicator_wins"], false);
    let (_, v) = fomet(&["distinguish", s(&a), s(&b), "--k", "3", "--identity"]);
    assert!(v["quantifier_rank"].as_u64().unwrap() <= 3);
    let (_, v) = fomet(&["game", s(&a), s(&b), "--k", "3"]);
    assert_eq!(v["duplicator_wins"], true);
}

#[test]
fn order_files_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.fms", "sig { } dom 3");
    let b = write(dir.path(), "b.fms", "sig { } dom 4");
    let o0 = write(dir.path(), "o0", "2 0 1");
    let o1 = write(dir.path(), "o1", "3, 1, 0, 2");
    let (code, v) = fomet(&["game", s(&a), s(&b), "--k", "2", "--order0", s(&o0), "--order1", s(&o1)]);
    assert_eq!(code, 0);
    assert_eq!(v["duplicator_wins"], true);
    let bad = write(dir.path(), "bad", "0 0 1");
    assert_eq!(fomet(&["game", s(&a), s(&b), "--order0", s(&bad), "--order1", s(&o1)]).0, 2);
}

#[test]
fn invariance_of_the_three_element_sentence() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "set.fms", "sig { } dom 4");
    let (code, v) = fomet(&["invariance", s(&f), "--formula", "Ex. Ey. (x < y & Ex. y < x)"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "invariant_on_s");
    assert_eq!(v["orders_checked"], 24);
}

#[test]
fn types_and_classify_report_json() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.fms", &cycle_text(50));
    let (code, v) = fomet(&["types", s(&f), "--k", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["types"][0]["count"], 50);
    let (code, v) = fomet(&["classify", s(&f), "--k", "1", "--pretty"]);
    assert_eq!(code, 0);
    assert_eq!(v["frequent"].as_array().unwrap().len(), 0);
}

#[test]
fn play_prints_a_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.fms", &cycle_text(5000));
    let b = write(dir.path(), "b.fms", &cycle_text(5003));
    let (code, v) = fomet(&["play", s(&a), s(&b), "--k", "1", "--seed", "4"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["engine"], "strategy");
    assert_eq!(v["rounds"].as_array().unwrap().len(), 1);
    let (_, again) = fomet(&["play", s(&a), s(&b), "--k", "1", "--seed", "4"]);
    assert_eq!(v, again);
}
