use std::process::Command;

use sockp_core::Decimal;
use sockp_toolkit::io::instance_from_json;

fn sockp(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sockp")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn generate_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let p = path.to_str().unwrap();
    let (code, _, err) = sockp(&["gen", "--family", "SC", "--n", "12", "--seed", "3", "--rho", "0.9", "--out", p]);
    assert_eq!(code, 0, "{err}");
    let (inst, omega) = instance_from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(inst.n(), 12);
    assert_eq!(omega.unwrap().cmp_value(&"3".parse::<Decimal>().unwrap()), std::cmp::Ordering::Equal);

    let (code, out, err) = sockp(&["exact", "--input", p]);
    assert_eq!(code, 0, "{err}");
    let exact: serde_json::Value = serde_json::from_str(&out).unwrap();
    let opt = exact["result"]["objective"].as_u64().unwrap();
    let sol = exact["result"]["solution"].as_str().unwrap().to_string();

    let (code, out, err) = sockp(&["bounds", "--input", p, "--m", "2,4", "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 5);

    let (code, out, _) = sockp(&["validate", "--input", p, "--solution", &sol, "--samples", "1000"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["feasible"], true);
    assert_eq!(v["profit"].as_u64().unwrap(), opt);
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(sockp(&["bounds", "--family", "SC", "--n", "10", "--m", "0"]).0, 2);
    assert_eq!(sockp(&["bounds", "--family", "SC", "--n", "10", "--m", "3", "--rho", "1.5"]).0, 2);
    assert_eq!(sockp(&["exact", "--input", "/nonexistent/file.json"]).0, 2);
    assert_eq!(sockp(&["gen", "--family", "XX", "--n", "3"]).0, 2);
    assert_eq!(sockp(&["exact", "--family", "SC"]).0, 2);
    assert_eq!(
        sockp(&["validate", "--family", "SC", "--n", "4", "--solution", "101"]).0,
        2
    );
    assert_eq!(sockp(&["guarantee", "--n", "100", "--m", "4"]).0, 2);
}

#[test]
fn guarantee_reports_dro_segments() {
    let (code, out, _) = sockp(&["guarantee", "--n", "100", "--target", "0.01", "--format", "csv"]);
    assert_eq!(code, 0);
    let row = out.lines().nth(1).unwrap();
    assert!(row.ends_with(",12"), "{row}");
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(sockp(&["--help"]).0, 0);
    assert_eq!(sockp(&[]).0, 2);
}
