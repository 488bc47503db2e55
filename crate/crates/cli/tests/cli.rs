use std::io::Write;
use std::process::{Command, Output};

use forestvol::coeffs::TaylorCoeffs;
use forestvol::interp::{format_exp, ln_xi_from_coeffs};
use forestvol::weight::DeltaParams;
use forestvol::Graph;
use num_rational::BigRational;
use serde_json::Value;
use tempfile::NamedTempFile;

fn graph_file(g: &Graph) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(g.to_edge_list().as_bytes()).unwrap();
    f
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forestvol")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(f: &NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

#[test]
fn exact_volume_of_an_edge() {
    let f = graph_file(&Graph::path(2));
    let v = json(&run(&["exact", "--graph", path(&f), "--delta", "1/4"]));
    assert_eq!(v["vol"], "7/16");
    assert_eq!(v["p1"], "7/9");
}

#[test]
fn text_output_lists_fields() {
    let f = graph_file(&Graph::path(2));
    let out = run(&["--output", "text", "exact", "--graph", path(&f), "--delta", "1/4"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().lines().any(|l| l == "vol: 7/16"));
}

#[test]
fn radius_rejects_large_delta() {
    let out = run(&["radius", "--max-degree", "3", "--delta", "1/10"]);
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr.lines().find_map(|l| l.strip_prefix("max_delta: ")).unwrap();
    let max: f64 = line.parse().unwrap();
    assert!((max - 0.0204).abs() < 1e-4, "{max}");
}

#[test]
fn radius_accepts_small_delta() {
    let v = json(&run(&["radius", "--max-degree", "3", "--delta", "1/100"]));
    assert!(v["R"].as_f64().unwrap() > 1.0);
}

#[test]
fn decimal_delta_is_a_usage_error() {
    let f = graph_file(&Graph::path(2));
    let out = run(&["exact", "--graph", path(&f), "--delta", "0.25"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_graph_is_an_input_error() {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(b"3 2\n0 1\n").unwrap();
    let out = run(&["exact", "--graph", path(&f), "--delta", "1/4"]);
    assert_eq!(out.status.code(), Some(3));
    let missing = run(&["exact", "--graph", "/nonexistent/graph.txt", "--delta", "1/4"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn exact_refuses_large_graphs() {
    let f = graph_file(&Graph::path(13));
    let out = run(&["exact", "--graph", path(&f), "--delta", "1/4"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn volume_reports_certificate() {
    let f = graph_file(&Graph::cycle(200));
    let v = json(&run(&["volume", "--graph", path(&f), "--delta", "1/100", "--eps", "1/100"]));
    for key in ["xi", "lower", "upper", "ln_xi", "R", "witness", "K", "tail_bound", "a", "wall_ms"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    assert_eq!(v["n"], 200);
    assert!(v["ln_lower"].as_f64() <= v["ln_xi"].as_f64());
    assert!(v["ln_xi"].as_f64() <= v["ln_upper"].as_f64());
}

#[test]
fn coefficients_reproduce_volume() {
    let g = Graph::petersen();
    let f = graph_file(&g);
    let args = ["--graph", path(&f), "--delta", "1/100", "--eps", "1/100"];
    let vol = json(&run(&[&["volume"], &args[..]].concat()));
    let coeffs = json(&run(&[&["coeffs"], &args[..]].concat()));
    assert_eq!(coeffs["K"], vol["K"]);
    let a: Vec<BigRational> = coeffs["a"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().parse().unwrap())
        .collect();
    let dp = DeltaParams::from_ratio(1, 100).unwrap();
    let (ln, _) = ln_xi_from_coeffs(g.n(), &dp, &TaylorCoeffs { a });
    assert_eq!(format_exp(ln), vol["xi"].as_str().unwrap());
}

#[test]
fn weights_trace_lists_cells() {
    let f = graph_file(&Graph::path(2));
    let out = run(&["weights", "--graph", path(&f), "--delta", "1/4", "--tree", "0", "--trace"]);
    let v = json(&out);
    assert_eq!(v[0]["hat_w"], "1/8");
    let trace = String::from_utf8(out.stderr).unwrap();
    assert_eq!(trace.lines().filter(|l| l.trim_start().starts_with("S=")).count(), 3);
}

#[test]
fn selftest_passes() {
    assert!(run(&["selftest"]).status.success());
}
