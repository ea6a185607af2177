use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "specs", &format!("{name}.json")]
        .iter()
        .collect();
    p.display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superweyl"))
        .args(args)
        .output()
        .unwrap()
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    });
    (out.status.code().unwrap(), v)
}

fn without_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn euler_sphere() {
    let (code, v) = run_json(&["euler", &spec("sphere2"), "--quad", "64"]);
    assert_eq!(code, 0);
    let chi = v["data"]["chi_computed"].as_f64().unwrap();
    assert!((chi - 2.0).abs() < 1e-6);
    assert_eq!(v["data"]["chi_expected"], 2);
    assert_eq!(v["data"]["nodes_per_dim"], 64);
    assert!(v["data"]["charts"][0]["label"].is_string());
}

#[test]
fn euler_torus_human_output() {
    let out = run(&["euler", &spec("torus2"), "--quad", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS  chi = 0"), "{text}");
}

#[test]
fn euler_odd_dimension_notes_zero() {
    let (code, v) = run_json(&["euler", &spec("flat3"), "--quad", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["chi_computed"], 0.0);
    assert!(v["data"]["note"].is_string());
}

#[test]
fn geometry_sphere_scalar() {
    let (code, v) = run_json(&["geometry", &spec("sphere2"), "--at", "th=1.0,ph=0.5"]);
    assert_eq!(code, 0);
    assert!((v["data"]["scalar"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn geometry_torus_is_flat() {
    let (code, v) = run_json(&["geometry", &spec("torus2")]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["scalar"], 0.0);
    assert!(v["data"]["riemann"].as_object().unwrap().is_empty());
    assert!(v["data"]["christoffel"].as_object().unwrap().is_empty());
}

#[test]
fn corrupted_spec_is_an_input_error() {
    let path = std::env::temp_dir().join(format!("superweyl-bad-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"name": "x", "dim": 2, "coordinates": ["a"]}"#).unwrap();
    let out = run(&["geometry", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_spec_and_bad_flags_exit_2() {
    assert_eq!(run(&["euler", "/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(
        run(&["laplacian-symbol", &spec("sphere2"), "--r", "abc"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["geometry", &spec("sphere2"), "--at", "th=9,ph=1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["fiber-selftest", "--n", "4"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn weitzenbock_hyperbolic() {
    let (code, v) = run_json(&["weitzenbock", &spec("h2"), "--samples", "10"]);
    assert_eq!(code, 0);
    assert!(v["passed"].as_bool().unwrap());
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn dcheck_sphere_passes() {
    let (code, v) = run_json(&["dcheck", &spec("sphere2")]);
    assert_eq!(code, 0);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks[0]["name"], "d^2 = 0");
    assert!(checks[1]["value"].as_f64().unwrap() > 1e-6);
}

#[test]
fn dcheck_flat_reports_the_constant_defect() {
    let (code, v) = run_json(&["dcheck", &spec("torus2")]);
    assert_eq!(code, 1);
    assert!(v["checks"][0]["passed"].as_bool().unwrap());
    assert!(!v["checks"][1]["passed"].as_bool().unwrap());
}

#[test]
fn laplacian_symbol_flat_is_pure_momentum() {
    let (code, v) = run_json(&["laplacian-symbol", &spec("torus2"), "--r", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["pure_momentum"], true);
    assert_eq!(v["data"]["exact"], true);
}

#[test]
fn laplacian_symbol_sphere() {
    let (code, v) = run_json(&["laplacian-symbol", &spec("sphere2"), "--at", "th=pi/2,ph=1"]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["pure_momentum"], false);
    assert!(v["data"]["symbol"].as_str().unwrap().contains("hbar"));
}

#[test]
fn fiber_selftest_passes_and_catches_injected_fault() {
    let (code, v) = run_json(&["fiber-selftest", "--n", "1,2", "--samples", "10"]);
    assert_eq!(code, 0, "{v}");
    let out = run(&["fiber-selftest", "--n", "1,2", "--samples", "10", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("first failing identity"), "{text}");
}

#[test]
fn output_is_deterministic() {
    let args = ["euler", &spec("sphere2"), "--quad", "16"];
    let (_, a) = run_json(&args);
    let (_, b) = run_json(&args);
    assert_eq!(without_time(a.clone()), without_time(b));
    let mut all = args.to_vec();
    all.push("--json");
    let seq = Command::new(env!("CARGO_BIN_EXE_superweyl"))
        .args(&all)
        .env("SUPERWEYL_THREADS", "0")
        .output()
        .unwrap();
    let c: Value = serde_json::from_slice(&seq.stdout).unwrap();
    assert_eq!(without_time(a), without_time(c));
}
