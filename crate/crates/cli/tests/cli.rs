use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const SQUARE: &str = r#"{"a": [[1, -1, 0, 0], [0, 0, 1, -1]], "b": [0, 1, 0, 1]}"#;
const SQUARE_THREE: &str = r#"{"a": [[1, -1, 0], [0, 0, 1]], "b": [0, 1, 0]}"#;
const SQUARE_FIVE: &str = r#"{"a": [[1, -1, 0, 0, 1], [0, 0, 1, -1, 1]], "b": [0, 1, 0, 1, 0]}"#;
const TRIANGLE: &str = r#"{"a": [[1, 0, -1], [0, 1, -1]], "b": [0, 0, 1]}"#;
const HALF_SPACE: &str = r#"{"a": [[1], [0]], "b": [0]}"#;

fn orthant(rho: f64) -> String {
    format!(r#"{{"a": [[1, {rho}], [0, {}]], "b": [0, 0]}}"#, (1.0 - rho * rho).sqrt())
}

fn polygauss(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_polygauss"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn report(args: &[&str], stdin: &str) -> Value {
    let out = polygauss(args, stdin);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn check_square() {
    let r = report(&["check", "-"], SQUARE);
    assert_eq!(r["general_position"], true);
    assert_eq!(r["rank"], 9);
    assert_eq!(r["n_faces"], 9);
    assert_eq!(r["faces"][5], serde_json::json!([1, 3]));
}

#[test]
fn check_three_half_spaces() {
    let r = report(&["check", "-"], SQUARE_THREE);
    assert_eq!(r["general_position"], false);
    assert_eq!(r["witness"], serde_json::json!([0, 1, 2]));
    assert_eq!(r["rank"], Value::Null);
}

#[test]
fn check_five_half_spaces() {
    let r = report(&["check", "-"], SQUARE_FIVE);
    assert_eq!(r["family_general_position"], false);
    assert_eq!(r["general_position"], true);
    assert_eq!(r["removed_redundant"], serde_json::json!([5]));
}

#[test]
fn probabilities() {
    let sq = report(&["prob", "-"], SQUARE);
    assert!((f(&sq["probability"]) - 0.116_516_235_668_598_05).abs() < 1e-6);
    let orth = report(&["prob", "-"], &orthant(0.5));
    assert!((f(&orth["probability"]) - 1.0 / 3.0).abs() < 1e-6);
    let half = report(&["prob", "-"], HALF_SPACE);
    assert!((f(&half["probability"]) - 0.5).abs() < 1e-9);
    assert!(f(&sq["doubling_gap"]) <= 1e-8);
    assert_eq!(sq["rank"], 9);
}

#[test]
fn key_order_is_fixed() {
    let out = polygauss(&["prob", "-", "--oracle", "--samples", "100000"], SQUARE);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys = ["\"probability\"", "\"rank\"", "\"doubling_gap\"", "\"singular_distance\"", "\"mc_value\"", "\"mc_stderr\"", "\"abs_diff\""];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
}

#[test]
fn oracle_agrees_and_reports_are_reproducible() {
    let args = ["prob", "-", "--oracle", "--samples", "400000", "--seed", "7"];
    let a = polygauss(&args, TRIANGLE);
    let b = polygauss(&args, TRIANGLE);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(f(&r["abs_diff"]) <= 4.0 * f(&r["mc_stderr"]) + 1e-6);
    let q = report(&["prob", "-", "--oracle", "--qmc", "--samples", "65536"], TRIANGLE);
    assert_eq!(q["oracle_method"], "qmc");
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = polygauss(&["prob", "-"], HALF_SPACE);
    let text = String::from_utf8(out.stdout).unwrap();
    let value = text.split("\"probability\":").nth(1).unwrap().split(',').next().unwrap();
    let mantissa = value.split('e').next().unwrap().replace('.', "");
    assert_eq!(mantissa.len(), 17, "{value}");
}

#[test]
fn oracle_mismatch_exits_4() {
    // a single sample gives 0 or 1 with zero standard error
    let out = polygauss(&["prob", "-", "--oracle", "--samples", "1", "--seed", "3"], SQUARE);
    assert_eq!(out.status.code(), Some(4));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["mc_value"].is_number());
}

#[test]
fn exit_codes() {
    assert_eq!(polygauss(&["check", "-"], "{\"a\": [[1,").status.code(), Some(2));
    assert_eq!(polygauss(&["check", "-"], r#"{"a": [[1, 2]], "b": [0]}"#).status.code(), Some(2));
    assert_eq!(polygauss(&["frobnicate"], "").status.code(), Some(2));
    let empty = r#"{"a": [[1, -1]], "b": [-1, -1]}"#;
    assert_eq!(polygauss(&["check", "-"], empty).status.code(), Some(3));
    assert_eq!(polygauss(&["prob", "-"], empty).status.code(), Some(3));
    assert_eq!(polygauss(&["prob", "-"], SQUARE_THREE).status.code(), Some(3));
    let singular = orthant(1.0 - 1e-12);
    assert_eq!(polygauss(&["selftest", "-"], &singular).status.code(), Some(5));
}

#[test]
fn selftest_passes_on_examples() {
    for text in [SQUARE.to_string(), TRIANGLE.to_string(), orthant(0.9)] {
        let r = report(&["selftest", "-"], &text);
        assert_eq!(r["pass"], true);
        assert!(f(&r["integrability_residual"]) <= 1e-6);
        assert!(f(&r["op_p3_residual"]) <= 1e-10);
        assert!(f(&r["decomposition_residual"]) <= 1e-10);
    }
}

#[test]
fn faces_and_system_export() {
    let r = report(&["faces", "-"], SQUARE_FIVE);
    assert_eq!(r["rank"], 9);
    assert_eq!(r["removed_redundant"], serde_json::json!([5]));
    let s = report(&["faces", "-", "--system"], SQUARE);
    let dirs = s["system"]["directions"].as_array().unwrap();
    assert_eq!(dirs.len(), 4 + 8);
    assert_eq!(dirs[0]["direction"], "b_1");
    assert_eq!(dirs[0]["matrix"].as_array().unwrap().len(), 9);
}

#[test]
fn files_in_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("problem.json");
    let output = dir.path().join("report.json");
    std::fs::write(&input, SQUARE).unwrap();
    let out = polygauss(&["check", input.to_str().unwrap(), "-o", output.to_str().unwrap()], "");
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(r["rank"], 9);
    let missing = dir.path().join("missing.json");
    assert_eq!(polygauss(&["check", missing.to_str().unwrap()], "").status.code(), Some(2));
}

#[test]
fn gaussian_with_mean_and_covariance() {
    let text = r#"{"a": [[1]], "b": [0], "mean": [1], "covariance": [[4]]}"#;
    let r = report(&["prob", "-"], text);
    // P(X >= 0) for X ~ N(1, 4) is Φ(1/2)
    assert!((f(&r["probability"]) - 0.691_462_461_274_013_1).abs() < 1e-8);
    let bad = r#"{"a": [[1]], "b": [0], "covariance": [[-1]]}"#;
    assert_eq!(polygauss(&["prob", "-"], bad).status.code(), Some(3));
}

#[test]
fn thread_cap_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_polygauss"))
            .args(["prob", "-", "--oracle", "--samples", "300000"])
            .env("POLYGAUSS_THREADS", threads)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .and_then(|mut c| {
                c.stdin.take().unwrap().write_all(TRIANGLE.as_bytes())?;
                c.wait_with_output()
            })
            .unwrap()
    };
    let one = run("1");
    let two = run("2");
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn bench_covers_the_bundled_set() {
    let r = report(&["bench"], "");
    let items = r["instances"].as_array().unwrap();
    assert_eq!(items.len(), 15);
    assert!(items.iter().all(|i| f(&i["probability"]) > 0.0 && f(&i["probability"]) < 1.0));
}
