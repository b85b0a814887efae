use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_umskel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn path4(dir: &Path) -> PathBuf {
    write(dir, "p4.json", r#"{"labels":["a","b","c","d"],"dist":[[0,1,2,3],[1,0,1,2],[2,1,0,1],[3,2,1,0]]}"#)
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn validate_accepts_a_metric() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate", path4(dir.path()).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["valid"], Value::Bool(true));
}

#[test]
fn validate_names_the_violated_triple() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"dist":[[0,1,5],[1,0,1],[5,1,0]]}"#);
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid_metric");
    let v = &err["violations"][0];
    assert_eq!(
        (v["axiom"].as_str(), v["i"].as_u64(), v["j"].as_u64(), v["k"].as_u64()),
        (Some("triangle"), Some(0), Some(1), Some(2))
    );
}

#[test]
fn duplicate_points_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let dup = write(dir.path(), "dup.json", r#"{"dist":[[0,0],[0,0]]}"#);
    let out = run(&["validate", dup.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate_point"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = path4(dir.path());
    let out = run(&["merge", "--space", p.to_str().unwrap(), "--u1", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let out = run(&["skeleton", "--space", p.to_str().unwrap(), "--eps", "0.5", "--dmax-sweep", "1:2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn contract_and_io_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = path4(dir.path());
    let out = run(&["xi", "--space", p.to_str().unwrap(), "--eps", "1.5", "--set", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "argument");

    let missing = dir.path().join("missing.json");
    let out = run(&["umdist", "--space", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let unwritable = dir.path().join("no/such/dir/out.json");
    let out = run(&["star", "--n", "3", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn merge_computes_side_trees_when_omitted() {
    let dir = tempfile::tempdir().unwrap();
    let p = path4(dir.path());
    let out = run(&["merge", "--space", p.to_str().unwrap(), "--u1", "0,1", "--u2", "2,3", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let upper = v["certificate"]["upper"].as_f64().unwrap();
    // both sides are isometric to ultrametrics, so the bound is 1 + 2 + 2 + 2 + 0.1
    assert!((3.0..=7.1 + 1e-12).contains(&upper), "{upper}");
}

#[test]
fn xi_reports_value_and_cover() {
    let dir = tempfile::tempdir().unwrap();
    let p = path4(dir.path());
    let out = run(&["xi", "--space", p.to_str().unwrap(), "--eps", "0.5", "--set", "0,1"]);
    let v = stdout_json(&out);
    assert!((v["value"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(v["balls"].as_array().unwrap().len(), 1);
    assert_eq!(v["exact"], Value::Bool(true));
}

#[test]
fn skeleton_output_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let space = dir.path().join("g.json");
    let gen = run(&["generate", "--kind", "graph", "--n", "9", "--seed", "7", "--out", space.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0));
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let s = space.to_str().unwrap();
    assert!(run(&["skeleton", "--space", s, "--eps", "0.5", "--threads", "1", "--out", a.to_str().unwrap()])
        .status
        .success());
    assert!(run(&["skeleton", "--space", s, "--eps", "0.5", "--threads", "3", "--out", b.to_str().unwrap()])
        .status
        .success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let sk: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    for key in ["subset", "tree", "nu", "distortion", "c_measured", "growth"] {
        assert!(!sk[key].is_null(), "missing {key}");
    }
    let margin = &sk["growth"]["margins"][0];
    for key in ["x", "r", "lhs", "rhs"] {
        assert!(!margin[key].is_null(), "margin missing {key}");
    }

    let maj = run(&["majorizing", "--space", s, "--skeleton", a.to_str().unwrap()]);
    assert_eq!(maj.status.code(), Some(0));
    assert_eq!(stdout_json(&maj)["all_pass"], Value::Bool(true));
}

#[test]
fn experiment_is_reproducible() {
    let args = ["experiment", "gaussian-argmax", "--n", "5", "--dim", "2", "--trials", "4000", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert_eq!(v["seed"], 11);
    assert!(v["rng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn star_report_matches_closed_forms() {
    let out = run(&["star", "--n", "100", "--report"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("4.291932"), "{text}");
    assert!(text.contains("3.128364"), "{text}");
}

#[test]
fn dvoretzky_csv_has_one_row_per_eps() {
    let dir = tempfile::tempdir().unwrap();
    let space = dir.path().join("p9.json");
    assert!(run(&["generate", "--kind", "path", "--n", "9", "--out", space.to_str().unwrap()]).status.success());
    let out = run(&["dvoretzky", "--space", space.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap().get(0), Some("eps"));
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 9);
    for (k, row) in rows.iter().enumerate() {
        let eps: f64 = row[0].parse().unwrap();
        assert!((eps - 0.1 * (k + 1) as f64).abs() < 1e-12);
        assert_eq!(&row[4], "true");
    }
}

#[test]
fn gamma_delta_modes_agree_on_equilateral() {
    let dir = tempfile::tempdir().unwrap();
    let space = dir.path().join("e3.json");
    assert!(run(&["generate", "--kind", "equilateral", "--n", "3", "--out", space.to_str().unwrap()]).status.success());
    let s = space.to_str().unwrap();
    let eq = stdout_json(&run(&["gamma-delta", "--space", s, "--equalize"]));
    let expected = (3.0f64).ln().sqrt();
    assert!((eq["V"].as_f64().unwrap() - expected).abs() < 1e-9);
    assert!(eq["residual"].as_f64().unwrap() < 1e-8);
    let grid = stdout_json(&run(&["gamma-delta", "--space", s, "--grid", "30"]));
    assert!((grid["gamma_upper"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!((grid["delta_lower"].as_f64().unwrap() - expected).abs() < 1e-12);
    let mu = write(dir.path(), "mu.json", "[1, 0, 0]");
    let given = stdout_json(&run(&["gamma-delta", "--space", s, "--mu", mu.to_str().unwrap()]));
    assert_eq!(given["gamma_upper"], "inf");
    assert_eq!(given["delta_lower"].as_f64(), Some(0.0));
}

#[test]
fn line_example_is_written() {
    let out = run(&["line-example", "--M", "4", "--N", "4"]);
    let v = stdout_json(&out);
    assert_eq!(v["bounds"]["union_lower_bound"].as_f64(), Some(15.0));
    assert_eq!(v["space"]["dist"].as_array().unwrap().len(), 16);
}
