use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fmark::marking::{GenerationWitness, MarkingBundle};
use fmark::thompson::{eval_on_generators, generator_f1, generator_f2};
use fmark::{compose, Word};
use serde_json::{json, Value};

fn fmark(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmark")).args(args).current_dir(dir).output().expect("binary runs")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_thompson_tuple(dir: &Path) {
    let t = json!({"generators": [generator_f1(), generator_f2()]});
    fs::write(dir.join("f.json"), t.to_string()).unwrap();
}

#[test]
fn build_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(fmark(&["build", "--n", "2", "--seed", "42", "--out", "a.json"], d).status.success());
    assert!(fmark(&["--threads", "1", "build", "--n", "2", "--seed", "42", "--out", "b.json"], d).status.success());
    let a = fs::read(d.join("a.json")).unwrap();
    assert_eq!(a, fs::read(d.join("b.json")).unwrap());
    let bundle: MarkingBundle = serde_json::from_slice(&a).unwrap();
    bundle.validate().unwrap();
    let report = read(&d.join("a.report.json"));
    assert_eq!(report["command"], "build");
    assert_eq!(report["seeds"], json!([42]));
    assert_eq!(report["certificates"][0]["checked_words"], 160);
    assert_eq!(report["outputs"]["a.json"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_bundle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(fmark(&["build", "--n", "1", "--out", "b.json"], d).status.success());
    let out = fmark(&["verify", "b.json"], d);
    assert_eq!(out.status.code(), Some(0));
    let cert = read(&d.join("b.cert.json"));
    assert_eq!(cert["summary"]["checked_words"], 16);
    assert_eq!(cert["summary"]["verified"], true);
}

#[test]
fn verify_thompson_tuple_reports_relation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_thompson_tuple(d);
    let out = fmark(&["verify", "f.json", "--radius", "5"], d);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("length 10"), "{stdout}");
    let cert = read(&d.join("f.cert.json"));
    let w: Word = cert["summary"]["word"].as_str().unwrap().parse().unwrap();
    assert_eq!(w.len(), 10);
    assert!(eval_on_generators(&w).unwrap().is_identity());
}

#[test]
fn bad_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.json"), "{\"generators\": [").unwrap();
    assert_eq!(fmark(&["verify", "bad.json", "--radius", "1"], d).status.code(), Some(1));
    assert_eq!(fmark(&["verify", "missing.json", "--radius", "1"], d).status.code(), Some(1));
    assert_eq!(fmark(&["build", "--n", "0"], d).status.code(), Some(1));
    write_thompson_tuple(d);
    assert_eq!(fmark(&["verify", "f.json"], d).status.code(), Some(1));
}

#[test]
fn tampered_bundle_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(fmark(&["build", "--n", "1", "--out", "b.json"], d).status.success());
    let mut v = read(&d.join("b.json"));
    v["m"] = json!(v["m"].as_i64().unwrap() + 1);
    fs::write(d.join("t.json"), v.to_string()).unwrap();
    let out = fmark(&["verify", "t.json"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invariant"));
}

#[test]
fn witness_evaluates_to_p_and_q() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(fmark(&["build", "--n", "1", "--out", "b.json"], d).status.success());
    assert_eq!(fmark(&["witness", "b.json"], d).status.code(), Some(0));
    let bundle: MarkingBundle = serde_json::from_value(read(&d.join("b.json"))).unwrap();
    let w: GenerationWitness = serde_json::from_value(read(&d.join("b.witness.json"))).unwrap();
    let gens = bundle.generators();
    assert_eq!(w.p.slp.eval(&gens).unwrap(), bundle.p);
    assert_eq!(w.q.slp.eval(&gens).unwrap(), bundle.q);
}

#[test]
fn distance_of_thompson_generators() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_thompson_tuple(d);
    assert_eq!(fmark(&["distance", "f.json", "--cutoff", "8"], d).status.code(), Some(0));
    let r = read(&d.join("f.distance.json"));
    assert_eq!(r["n"], 4);
    assert_eq!(r["exact"], true);
}

#[test]
fn express_composite() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let f = compose(&generator_f2(), &generator_f1());
    fs::write(d.join("e.json"), serde_json::to_string(&f).unwrap()).unwrap();
    assert_eq!(fmark(&["express", "e.json"], d).status.code(), Some(0));
    let r = read(&d.join("e.word.json"));
    assert_eq!(r["length"], 2);
    let w: Word = Word::parse(r["word"].as_str().unwrap(), 2).unwrap();
    assert_eq!(eval_on_generators(&w).unwrap(), f);
}

#[test]
fn free_pair_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(fmark(&["free-pair", "--n", "3", "--seed", "7", "--out", "p.json"], d).status.success());
    assert!(fmark(&["--threads", "2", "free-pair", "--n", "3", "--seed", "7", "--out", "q.json"], d).status.success());
    assert_eq!(fs::read(d.join("p.json")).unwrap(), fs::read(d.join("q.json")).unwrap());
    assert_eq!(read(&d.join("p.json"))["checked_words"], 52);
}
