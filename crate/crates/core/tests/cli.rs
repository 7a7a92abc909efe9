use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_loopalg")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn classify_affine() {
    let (code, body) = run(&["classify", "--gcm", "[[2,-2],[-2,2]]"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["type"], "affine");
}

#[test]
fn decide_is_deterministic() {
    let args = ["decide", "--gcm", "D4", "--seed", "7"];
    let (c1, b1) = run(&args);
    let (c2, b2) = run(&args);
    assert_eq!((c1, &b1), (c2, &b2));
    assert!(c1 == 0 || c1 == 2);
}

#[test]
fn flip_is_not_untwisted() {
    let flip = r#"[{"kind":"diagram","perm":[2,1]}]"#;
    let (code, _) = run(&["decide", "--gcm", "A2", "--sigma1", flip, "--sigma2", "[]", "--m", "2"]);
    assert_eq!(code, 2);
}

#[test]
fn bad_input_exits_one() {
    let (code, body) = run(&["loop", "--gcm", "A2", "--sigma1", r#"[{"kind":"adr"}]"#, "--m", "2"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert!(v["path"].as_str().unwrap().starts_with("/0"));
}

#[test]
fn table_tsv() {
    let (code, body) = run(&["table", "--max-rank", "4", "--format", "tsv"]);
    assert_eq!(code, 0);
    assert!(body.lines().any(|l| l.contains("D4^(3)")));
}
