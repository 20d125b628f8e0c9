use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str, body: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn ex1() -> PathBuf {
    let r = 3f64.sqrt();
    fixture(
        "ex1.json",
        &format!(r#"{{"labels":["A1","A2","B1","B2"],"dim":2,"points":[[-5,{r}],[-5,-{r}],[5,{r}],[5,-{r}]]}}"#),
    )
}

fn fmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmetric")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn validate_accepts_a_metric_and_rejects_a_triangle_violation() {
    let good = ex1();
    let out = fmetric(&["validate", "--input", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["valid"], true);

    let bad = fixture("bad.json", r#"{"matrix":[[0,1,5],[1,0,1],[5,1,0]]}"#);
    let out = fmetric(&["validate", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["result"]["valid"], false);
    assert_eq!(r["error"]["kind"], "TriangleViolation");
}

#[test]
fn io_and_parse_errors_exit_2() {
    assert_eq!(fmetric(&["validate", "--input", "/definitely/missing.json"]).status.code(), Some(2));
    let junk = fixture("junk.json", "{not json");
    assert_eq!(fmetric(&["validate", "--input", junk.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(fmetric(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn examples_ex1_at_p1() {
    let out = fmetric(&["examples", "--name", "ex1", "--p", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = report(&out)["result"]["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 2);
    assert!((num(&rows[0]["computed"]) - (10.0 + 4.0 * 3f64.sqrt())).abs() < 1e-9);
    assert!((num(&rows[1]["computed"]) - 16.0).abs() < 1e-9);
}

#[test]
fn functor_dist_with_certificate_and_unknown_label() {
    let x = ex1();
    let x = x.to_str().unwrap();
    let a = r#"{"kind":"set","indices":["A1","A2"]}"#;
    let b = r#"{"kind":"set","indices":["B1","B2"]}"#;
    let out = fmetric(&["functor-dist", "--input", x, "--functor", "nonempty-pairs", "--p", "inf", a, b]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((num(&r["result"]["distance"]) - 10.0).abs() < 1e-9);
    assert!((num(&r["result"]["chain_cost"]) - 10.0).abs() < 1e-9);

    let out = fmetric(&["functor-dist", "--input", x, "--functor", "pairs", r#"{"kind":"set","indices":["Q"]}"#, b]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["error"]["kind"], "UnknownElement");

    let out = fmetric(&["functor-dist", "--input", x, "--functor", "cubes", a, b]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["error"]["kind"], "UnknownFunctor");
}

#[test]
fn group_commands() {
    let tri = fixture("tri.json", r#"{"dim":2,"points":[[0,0],[1,0],[0.5,0.8660254037844386],[0.5,0.28867513459481287]]}"#);
    let out = fmetric(&["group-norm", "--input", tri.to_str().unwrap(), "--modulus", "3", r#"{"values":{"x0":1,"x1":1,"x2":1}}"#]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((num(&r["result"]["d1"]) - 3f64.sqrt()).abs() < 1e-9);
    assert!((num(&r["result"]["norm_restricted"]) - 2.0).abs() < 1e-9);

    let two = fixture("two.json", r#"{"labels":["x","y"],"matrix":[[0,1],[1,0]]}"#);
    let out = fmetric(&["graev", "--input", two.to_str().unwrap(), "--modulus", "4", r#"{"values":{"x":2}}"#, r#"{"values":{"y":2}}"#]);
    let r = report(&out);
    assert_eq!(num(&r["result"]["graev"]), 2.0);
    assert_eq!(num(&r["result"]["d1"]), 1.0);
}

#[test]
fn hyperspace_tightspan_entropy_boxdim() {
    let tri = fixture("tri2.json", r#"{"dim":2,"points":[[0,0],[1,0],[0.5,0.8660254037844386],[0.5,0.28867513459481287]]}"#);
    let t = tri.to_str().unwrap();
    let r = report(&fmetric(&["hyper-d1", "--input", t, "[0,1,2]", "[3]"]));
    assert!((num(&r["result"]["d1"]) - 3f64.sqrt()).abs() < 1e-9);
    assert!((num(&r["result"]["chain_cost"]) - 3f64.sqrt()).abs() < 1e-9);

    let r = report(&fmetric(&["tightspan-project", "--input", t, r#"[5, 5, 5, "inf"]"#]));
    assert_eq!(r["result"]["extremal"], true);
    assert_eq!(r["result"]["pointwise_below_input"], true);

    let r = report(&fmetric(&["entropy", "--input", t, "--epsilon", "0.6", "--functor", "hyperspace", "--degree", "2", "--p", "2"]));
    assert_eq!(r["result"]["cover_valid"], true);
    assert_eq!(r["result"]["functor_check"]["holds"], true);

    let r = report(&fmetric(&["boxdim", "--cantor", "8"]));
    let slope = num(&r["result"]["report"]["least_squares_slope"]);
    assert!((slope - 2f64.ln() / 3f64.ln()).abs() < 1e-2);
}

#[test]
fn check_rejects_zero_trials_and_catches_the_injected_violation() {
    assert_eq!(fmetric(&["check", "--trials", "0"]).status.code(), Some(1));
    let out = fmetric(&["check", "--trials", "5", "--inject-triangle-violation"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let first = &r["result"]["properties"][0];
    assert_eq!(first["name"], "metric-validation");
    assert!(first["first_counterexample"]["detail"].as_str().unwrap().contains("TriangleViolation"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let out_path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("check.json");
    let o = out_path.to_str().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            assert_eq!(fmetric(&["check", "--seed", "3", "--trials", "10", "--output", o]).status.code(), Some(0));
            std::fs::read(&out_path).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(fmetric(&["examples"]).stdout, fmetric(&["examples"]).stdout);
}
