use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ncpsh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncpsh")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn expanded(dir: &TempDir, name: &str, expr: &str, d: usize, maxdeg: usize) -> PathBuf {
    let e = put(dir, &format!("{name}.txt"), expr);
    let out = dir.path().join(format!("{name}.json"));
    let r =
        ncpsh(&["expand", "--expr", s(&e), "--d", &d.to_string(), "--maxdeg", &maxdeg.to_string(), "--out", s(&out)]);
    assert!(r.status.success());
    out
}

const E12: &str = r#"{"n":2,"d":1,"matrices":[[[[0,0],[1,0]],[[0,0],[0,0]]]]}"#;

#[test]
fn eval_nilpotent_square() {
    let dir = TempDir::new().unwrap();
    let e = put(&dir, "e.txt", "x1 x1'");
    let p = put(&dir, "p.json", E12);
    let out = ncpsh(&["eval", "--expr", s(&e), "--point", s(&p)]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["command"], "eval");
    let m = &v["result"]["matrix"];
    assert_eq!(m[0][0][0], 1.0);
    assert_eq!(m[1][1][0], 0.0);
    assert!(v["config"]["psd_tol"].is_number());
}

#[test]
fn negative_square_fails_certificate_with_word_z1() {
    let dir = TempDir::new().unwrap();
    let series = expanded(&dir, "neg", "-x1' x1", 1, 4);
    let out = ncpsh(&["certify-psh", "--series", s(&series), "--N", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "failed");
    assert_eq!(v["result"]["witness"]["words"][0], "z1");
    assert_eq!(v["result"]["witness_check"]["confirmed"], true);
}

#[test]
fn hereditary_square_is_certified() {
    let dir = TempDir::new().unwrap();
    let series = expanded(&dir, "sq", "x1 x1' + x2' x2 + (1 + x1)(1 + x1')", 2, 4);
    let out = ncpsh(&["certify-psh", "--series", s(&series), "--N", "2", "--sample"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["sampler"]["witness"], false);
}

#[test]
fn realize_then_verify_then_continue() {
    let dir = TempDir::new().unwrap();
    let series = expanded(&dir, "aff", "inv(1 - 0.3 x1 - 0.3 x1')", 1, 8);
    let r = dir.path().join("r.json");
    let out = ncpsh(&["realize", "--series", s(&series), "--N", "3", "--out", s(&r)]);
    assert!(out.status.success());
    assert_eq!(json(&out)["result"]["diagnostics"]["rank_plus"], 1);

    let out = ncpsh(&[
        "verify-realization",
        "--realization",
        s(&r),
        "--series",
        s(&series),
        "--samples",
        "10",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(json(&out)["result"]["max_value_error"].as_f64().unwrap() < 1e-6);

    let path = put(
        &dir,
        "path.json",
        r#"{"steps":[{"n":1,"d":1,"matrices":[[[[0.1,0.05]]]]},{"n":1,"d":1,"matrices":[[[[0.05,-0.1]]]],"tol":0.01}]}"#,
    );
    let last = dir.path().join("last.json");
    let out = ncpsh(&["continue", "--realization", s(&r), "--path", s(&path), "--order", "24", "--out", s(&last)]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"]["completed"], true);
    assert_eq!(v["result"]["steps"].as_array().unwrap().len(), 2);
    assert!(last.exists());
}

#[test]
fn continuation_stops_outside_the_domain() {
    let dir = TempDir::new().unwrap();
    let series = expanded(&dir, "aff", "inv(1 - 0.3 x1 - 0.3 x1')", 1, 8);
    let r = dir.path().join("r.json");
    assert!(ncpsh(&["realize", "--series", s(&series), "--N", "3", "--out", s(&r)]).status.success());
    let path = put(&dir, "far.json", r#"{"steps":[{"n":1,"d":1,"matrices":[[[[4.0,0.0]]]]}]}"#);
    let out = ncpsh(&["continue", "--realization", s(&r), "--path", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["result"]["completed"], false);
    assert_eq!(v["result"]["steps"][0]["segment"]["valid"], false);
}

#[test]
fn log_radius_root_test() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("roots.csv");
    let out = ncpsh(&["lab", "log-radius", "--N", "200", "--csv", s(&csv)]);
    assert!(out.status.success());
    let est = json(&out)["result"]["estimate"].as_f64().unwrap();
    assert!((est - 0.5).abs() < 0.02, "{est}");
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 201);
}

#[test]
fn lab_bch_and_substitution() {
    let out = ncpsh(&["lab", "bch", "--maxdeg", "6", "--samples", "5"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["result"]["degree_two_exact"], true);
    let out = ncpsh(&["lab", "martin-shamovich", "--maxdeg", "6", "--divergence-degree", "60"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["result"]["matched_through"], 6);
}

#[test]
fn lab_triangular_rejects_non_analytic() {
    let dir = TempDir::new().unwrap();
    let x = put(&dir, "x.json", r#"{"n":1,"d":1,"matrices":[[[[0.2,0]]]]}"#);
    let y = put(&dir, "y.json", r#"{"n":1,"d":1,"matrices":[[[[-0.1,0.3]]]]}"#);
    let good = put(&dir, "good.txt", "exp(x1) + inv(2 - x1)");
    let out = ncpsh(&["lab", "triangular", "--expr", s(&good), "--X", s(&x), "--Y", s(&y), "--c", "-1+2i"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bad = put(&dir, "bad.txt", "x1' x1");
    let out = ncpsh(&["lab", "triangular", "--expr", s(&bad), "--X", s(&x), "--Y", s(&y), "--c", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn conjugate_reports_mixed_word() {
    let dir = TempDir::new().unwrap();
    let ph = expanded(&dir, "ph", "x1 + x1' + 2", 1, 4);
    let out = ncpsh(&["conjugate", "--series", s(&ph)]);
    assert!(out.status.success());
    assert_eq!(json(&out)["result"]["pluriharmonic"], true);
    let not = expanded(&dir, "not", "x1 x1'", 1, 4);
    let out = ncpsh(&["conjugate", "--series", s(&not)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["witness_word"], "z1 z1*");
}

#[test]
fn diff_symbolic_matches_finite_differences() {
    let dir = TempDir::new().unwrap();
    let e = put(&dir, "e.txt", "x1 x2' x1 + x2^2");
    let p = put(&dir, "p.json", r#"{"n":1,"d":2,"matrices":[[[[0.3,0.1]]],[[[-0.2,0.4]]]]}"#);
    let h = put(&dir, "h.json", r#"{"n":1,"d":2,"matrices":[[[[1,0]]],[[[0,1]]]]}"#);
    for op in ["D", "Dstar", "hessian", "DR", "DR2"] {
        let a = json(&ncpsh(&["diff", "--expr", s(&e), "--op", op, "--point", s(&p), "--dir", s(&h)]));
        let b = json(&ncpsh(&["diff", "--expr", s(&e), "--op", op, "--fd", "--point", s(&p), "--dir", s(&h)]));
        for part in 0..2 {
            let u = a["result"]["matrix"][0][0][part].as_f64().unwrap();
            let v = b["result"]["matrix"][0][0][part].as_f64().unwrap();
            assert!((u - v).abs() < 1e-6, "{op}: {u} vs {v}");
        }
    }
}

#[test]
fn reports_are_deterministic_across_workers() {
    let dir = TempDir::new().unwrap();
    let series = expanded(&dir, "mix", "x1 x1' - 0.5 x1' x1 + x2 x2'", 2, 4);
    let run = |w: &str| {
        let out = ncpsh(&["certify-psh", "--series", s(&series), "--N", "1", "--sample", "--workers", w]);
        let mut v = json(&out);
        v["config"]["workers"] = Value::Null;
        (out.status.code(), v)
    };
    let (c1, v1) = run("1");
    let (c4, v4) = run("4");
    assert_eq!(c1, Some(1));
    assert_eq!((c1, &v1), (c4, &v4));
    let again = ncpsh(&["certify-psh", "--series", s(&series), "--N", "1", "--sample"]);
    let first = ncpsh(&["certify-psh", "--series", s(&series), "--N", "1", "--sample"]);
    assert_eq!(again.stdout, first.stdout);
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = put(&dir, "c.toml", "seed = 11\nbch_samples = 3\n");
    let out = ncpsh(&["lab", "bch", "--maxdeg", "4", "--config", s(&cfg), "--seed", "12"]);
    let v = json(&out);
    assert_eq!(v["config"]["seed"], 12);
    assert_eq!(v["config"]["bch_samples"], 3);
    assert_eq!(v["result"]["samples"].as_array().unwrap().len(), 3);
    let bad = put(&dir, "bad.toml", "no_such_key = 1\n");
    assert_eq!(ncpsh(&["lab", "bch", "--config", s(&bad)]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ncpsh(&["eval"]).status.code(), Some(2));
    assert_eq!(ncpsh(&["eval", "--expr", "/nonexistent", "--point", "/nonexistent"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let e = put(&dir, "e.txt", "x1 +");
    let p = put(&dir, "p.json", E12);
    let out = ncpsh(&["eval", "--expr", s(&e), "--point", s(&p)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));
}

#[test]
fn text_format_lists_config() {
    let out = ncpsh(&["lab", "log-radius", "--N", "40", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("lab log-radius: ok"));
    assert!(text.contains("psd_tol = "));
}
