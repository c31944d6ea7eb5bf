//! End-to-end runs of the `hyperqsp` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperqsp"))
        .args(args)
        .env_remove("HYPERQSP_BETA_MAX")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen_to(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path]);
    let o = run(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('x'))
        // Undefined bounds are empty fields.
        .map(|l| l.split(',').map(|v| if v.is_empty() { f64::NAN } else { v.parse().unwrap() }).collect())
        .collect()
}

#[test]
fn constant_protocol_passes_its_bounds() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["6", "8", "10"] {
        let file = gen_to(dir.path(), &format!("c{n}.json"), &["constant", "--n", n, "--phi", "pi/3"]);
        let o = run(&["eval", &file, "--grid", "1:4:300", "--bounds", "secant,simple,chebyshev-lower"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let out = stdout(&o);
        assert!(out.lines().next().unwrap().starts_with("# {"));
        assert_eq!(data_rows(&out).len(), 300);
    }
}

#[test]
fn trivial_protocol_value() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_to(dir.path(), "t3.json", &["trivial", "--n", "3"]);
    let o = run(&["eval", &file, "--x", "2"]);
    assert_eq!(code(&o), 0);
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    // T_3(2) = 26
    assert!((rows[0][3] - 676.0).abs() < 1e-9);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_to(dir.path(), "t2.json", &["trivial", "--n", "2"]);
    assert_eq!(code(&run(&["eval", &file, "--x", "0.5"])), 2);
    assert_eq!(code(&run(&["eval", dir.path().join("missing.json").to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["gen", "trivial", "--n", "0"])), 2);
    assert_eq!(code(&run(&["fit", "--target", "exp(", "--x-max", "2", "--degree", "4"])), 2);
    std::fs::write(dir.path().join("bad.json"), "{\"schema_version\": 1}").unwrap();
    assert_eq!(code(&run(&["eval", dir.path().join("bad.json").to_str().unwrap(), "--x", "1.5"])), 2);
}

#[test]
fn infeasible_synthesis_exits_3() {
    let o = run(&["synth", "--coeffs", "0,2"]);
    assert_eq!(code(&o), 3);
    let o = run(&["synth", "--coeffs", "0,0,0,0,0,1"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for p in report["protocol"]["phases"].as_array().unwrap() {
        assert!(p.as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_to(dir.path(), "a.json", &["constant", "--n", "5", "--phi", "0.4"]);
    let b = gen_to(dir.path(), "b.json", &["constant", "--n", "5", "--phi", "0.4"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let e1 = run(&["eval", &a, "--grid", "1:2:50", "--format", "json"]);
    let e2 = run(&["eval", &b, "--grid", "1:2:50", "--format", "json"]);
    assert_eq!(code(&e1), 0);
    assert_eq!(e1.stdout, e2.stdout);
}

#[test]
fn gain_cutoff_is_configurable() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_to(dir.path(), "z.json", &["explicit", "--phases", "0"]);
    assert_eq!(code(&run(&["modes", &file, "--beta", "6"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_hyperqsp"))
        .args(["modes", &file, "--beta", "6"])
        .env("HYPERQSP_BETA_MAX", "7")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let u = report["u"][0].as_f64().unwrap();
    assert!((u - 6f64.cosh()).abs() < 1e-9 * u);
}

#[test]
fn modes_single_boost() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_to(dir.path(), "z.json", &["explicit", "--phases", "0"]);
    let o = run(&["modes", &file, "--beta", &std::f64::consts::LN_2.to_string()]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((report["u"][0].as_f64().unwrap() - 1.25).abs() < 1e-14);
    assert!((report["v"][0].as_f64().unwrap() - 0.75).abs() < 1e-14);
}

#[test]
fn fit_writes_table() {
    let o = run(&["fit", "--target", "exp(x)", "--x-max", "2", "--degree", "8", "--table"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["sup_residual"].as_f64().unwrap() < 1e-8);
    assert!(report.get("table").is_some());
}
