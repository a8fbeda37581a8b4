use std::process::{Command, Output};

use kneading_core::kneading::builtin_spec;
use kneading_core::rational::rat_to_string;
use kneading_core::simplex::det_a;
use serde_json::Value;

fn kneadlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kneadlab"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn fibonacci_successor() {
    let out = kneadlab(&["odometer", "succ", "--word", "101", "--map", "fibonacci"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["word"], "0001");
    assert_eq!(v["value"], "5");
}

#[test]
fn dets_match_the_library() {
    let dir = std::env::temp_dir().join(format!("kneadlab-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cantor.json");
    std::fs::write(&path, r#"{"q": "pow3tower", "b": {"builtin": "cantor"}}"#).unwrap();
    let out = kneadlab(&[
        "simplex",
        "dets",
        "--spec",
        path.to_str().unwrap(),
        "--depth",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let q = builtin_spec("cantor").unwrap().into_map();
    for r in 0..=3 {
        assert_eq!(
            v["dets"][r],
            rat_to_string(&det_a(&q, r).unwrap().determinant)
        );
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_spec_file_exits_one() {
    let out = kneadlab(&[
        "simplex",
        "dets",
        "--spec",
        "/nonexistent/cantor.json",
        "--depth",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "usage");
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(
        kneadlab(&["odometer", "succ", "--depth", "x"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(kneadlab(&["knead", "frobnicate"]).status.code(), Some(1));
}

#[test]
fn domain_errors_exit_two() {
    let out = kneadlab(&["interval", "knead", "--family", "logistic", "--param", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "domain");
    let out = kneadlab(&["odometer", "pred", "--word", "", "--map", "fibonacci"]);
    assert_eq!(out.status.code(), Some(2));
    let out = kneadlab(&["simplex", "threads", "--map", "fibonacci", "--depth", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let runs: [&[&str]; 3] = [
        &[
            "bratteli",
            "matrix",
            "--map",
            "fibonacci",
            "--level",
            "6",
            "--seed",
            "3",
        ],
        &[
            "interval",
            "find",
            "--map",
            "fibonacci",
            "--depth",
            "8",
            "--prec",
            "128",
        ],
        &[
            "simplex",
            "certify",
            "--spec",
            "finite:2",
            "--depth",
            "1",
            "--horizon",
            "3",
        ],
    ];
    for args in runs {
        let a = kneadlab(args);
        let b = kneadlab(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn numbers_are_strings() {
    fn check(v: &Value) {
        match v {
            Value::Number(n) => panic!("bare number {n}"),
            Value::Array(a) => a.iter().for_each(check),
            Value::Object(m) => m.values().for_each(check),
            _ => {}
        }
    }
    for args in [
        &["knead", "times", "--map", "fibonacci", "--depth", "8"][..],
        &["bratteli", "stage", "--map", "doubling", "--level", "4"],
        &["simplex", "threads", "--spec", "countable", "--depth", "5"],
        &[
            "interval",
            "lyapunov",
            "--family",
            "tent",
            "--param",
            "2",
            "--x0",
            "0.3",
            "--horizon",
            "100",
        ],
    ] {
        let out = kneadlab(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        check(&json(&out));
    }
}

#[test]
fn hex_parameters_replay() {
    let out = kneadlab(&["interval", "find", "--map", "fibonacci", "--depth", "10"]);
    let hex = json(&out)["parameter"]["hex"].as_str().unwrap().to_string();
    let out = kneadlab(&["interval", "knead", "--param", &hex, "--depth", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let q: Vec<String> = (0..=10u64)
        .map(|k| k.saturating_sub(2).to_string())
        .collect();
    assert_eq!(json(&out)["q"], serde_json::json!(q));
}
