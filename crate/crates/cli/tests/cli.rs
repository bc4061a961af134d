use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sperner_lab_cli::{run, Command as Cmd, OutputFormat, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sperner-lab"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn sperner_lab(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_str().map_or_else(|| v.to_string(), str::to_owned).parse().unwrap()
}

#[test]
fn levels_csv_matches_poisson_binomial() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"p": [0.2, 0.5, 0.7]}"#);
    let out = sperner_lab(&["levels", "--measure", m.to_str().unwrap(), "--output", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,probability"));
    let expected = [0.12, 0.43, 0.38, 0.07];
    for (l, (line, want)) in lines.zip(expected).enumerate() {
        let (level, prob) = line.split_once(',').unwrap();
        assert_eq!(level.parse::<usize>().unwrap(), l);
        assert!((prob.parse::<f64>().unwrap() - want).abs() < 1e-12, "{line}");
    }
}

#[test]
fn precision_sets_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"p": [0.2, 0.5, 0.7]}"#);
    let out = sperner_lab(&["levels", "--measure", m.to_str().unwrap(), "--output", "csv", "--precision", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "level,probability\n0,0.120\n1,0.430\n2,0.380\n3,0.0700\n");
}

#[test]
fn lym_on_uniform_level_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"p": [0.5, 0.5, 0.5]}"#);
    let fam = write(dir.path(), "f.json", r#"{"n": 3, "members": ["0x1", "0x2", "0x4"]}"#);
    let out = sperner_lab(&["lym", "--measure", m.to_str().unwrap(), "--family", fam.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((f(&v["lym_sum"]) - 1.0).abs() < 1e-12);
    assert_eq!(v["satisfied"], Value::Bool(true));
}

#[test]
fn verify_uniform_four() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"p": [0.5, 0.5, 0.5, 0.5]}"#);
    let out = sperner_lab(&["verify", "--measure", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(f(&v["max_residual"]) < 1e-12);
    assert_eq!(v["levels"].as_array().unwrap().len(), 4);
}

#[test]
fn chain_sample_lines_are_maximal_chains() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"p": [0.3, 0.6, 0.9, 0.1, 0.5]}"#);
    let out = sperner_lab(&["chain-sample", "--measure", m.to_str().unwrap(), "--trials", "25"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 25);
    for line in text.lines() {
        let masks: Vec<u64> = line
            .split(',')
            .map(|h| u64::from_str_radix(h.trim_start_matches("0x"), 16).unwrap())
            .collect();
        assert_eq!(masks.len(), 5);
        let mut prev = 0u64;
        for m in masks {
            assert_eq!(m & prev, prev);
            assert_eq!((m ^ prev).count_ones(), 1);
            prev = m;
        }
        assert_eq!(prev, 0x1f);
    }
}

#[test]
fn maxantichain_and_sperner_agree_with_best_level() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"p": [0.2, 0.5, 0.7]}"#);
    let v = json(&sperner_lab(&["maxantichain", "--measure", m.to_str().unwrap()]));
    assert!((f(&v["weight"]) - 0.43).abs() < 1e-12);
    assert_eq!(v["members"], serde_json::json!(["0x1", "0x2", "0x4"]));
    let fam = write(dir.path(), "f.json", r#"{"n": 3, "members": ["0x3", "0x4"]}"#);
    let out = sperner_lab(&["sperner", "--measure", m.to_str().unwrap(), "--family", fam.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    // {0,1} and {2}: 0.2·0.5·0.3 + 0.8·0.5·0.7
    assert!((f(&v["measure"]) - 0.31).abs() < 1e-12);
}

#[test]
fn bound_report_is_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"p": [0.5, 0.5, 0.5, 0.5]}"#);
    let v = json(&sperner_lab(&["bound", "--measure", m.to_str().unwrap(), "--mode", "paper"]));
    assert_eq!(v["mode"], "paper");
    assert!((f(&v["exact_max"]) - 0.375).abs() < 1e-12);
    assert!((f(&v["closed_bound"]) - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    assert!(f(&v["exact_max"]) <= f(&v["quadrature_bound"]));
    assert_eq!(v["ordered"], Value::Bool(true));
}

#[test]
fn enumerate_counts() {
    for (n, count) in [(0, 2), (1, 3), (2, 6), (3, 20), (4, 168), (5, 7581)] {
        let v = json(&sperner_lab(&["enumerate", "--n", &n.to_string()]));
        assert_eq!(v["antichains"], count, "n = {n}");
    }
}

#[test]
fn mc_check_passes_and_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"p": [0.2, 0.5, 0.7, 0.4]}"#);
    let args = ["mc-check", "--measure", m.to_str().unwrap(), "--level", "2", "--trials", "20000"];
    let one = bin().args(args).env("SPERNER_LAB_THREADS", "1").output().unwrap();
    let many = bin().args(args).env("SPERNER_LAB_THREADS", "8").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let v = json(&one);
    assert_eq!(v["method"], "histogram");
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"p\": [0.2,\n  oops]}");
    let out = sperner_lab(&["levels", "--measure", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.json") && err.contains("line 2 column"), "{err}");

    let range = write(dir.path(), "r.json", r#"{"p": [1.5]}"#);
    assert_eq!(sperner_lab(&["levels", "--measure", range.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(sperner_lab(&["levels"]).status.code(), Some(1));
    assert_eq!(sperner_lab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sperner_lab(&["levels", "--precision", "0"]).status.code(), Some(1));
    assert_eq!(sperner_lab(&["--help"]).status.code(), Some(0));

    let m = write(dir.path(), "m.json", r#"{"p": [0.5, 0.5, 0.5]}"#);
    let not_anti = write(dir.path(), "f.json", r#"{"n": 3, "members": ["0x1", "0x3"]}"#);
    let out = sperner_lab(&["lym", "--measure", m.to_str().unwrap(), "--family", not_anti.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = sperner_lab(&["mc-check", "--measure", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_in_process_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"p": [0.15, 0.5, 0.85, 0.3, 0.6]}"#);
    let mut cfg = RunConfig::new(Cmd::ChainSample);
    cfg.measure_path = Some(m);
    cfg.trials = Some(40);
    cfg.seed = 11;
    cfg.output = OutputFormat::Csv;
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a, b);
    cfg.seed = 12;
    assert_ne!(run(&cfg).unwrap().stdout, a.stdout);
}
