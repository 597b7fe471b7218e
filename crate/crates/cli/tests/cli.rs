use std::path::PathBuf;
use std::process::Command;

use flatpencil::io::parse_frobenius;
use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_flatpencil"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn report(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.push("--json");
    let (code, out, err) = run(&a);
    assert!(err.is_empty(), "{err}");
    (code, serde_json::from_str(&out).unwrap())
}

fn names(r: &Value) -> Vec<String> {
    r["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn frobenius_check_a2_passes() {
    let (code, r) = report(&["frobenius", "check", &data("a2.json")]);
    assert_eq!(code, 0);
    let n = names(&r);
    assert!(n.iter().any(|x| x == "WDVV associativity"));
    assert!(n.iter().any(|x| x.starts_with("quasihomogeneity")));
}

#[test]
fn reconstruct_cp1_uses_d1_path() {
    let (code, r) = report(&["pencil", "reconstruct", &data("cp1-pencil.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["mode"], "d1-remark");
}

#[test]
fn malformed_expression_exits_3_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, r#"{"schema": 1, "n": 1, "g1": [["t1 ++ 2"]], "g2": [["1"]]}"#).unwrap();
    let (code, _, err) = run(&["pencil", "check", f.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(err.contains("line 1, column 5"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobenius", "check", &data("a2.json"), "--fast"]).0, 2);
    assert_eq!(run(&["coxeter", "--type", "A", "--rank", "5"]).0, 2);
    assert_eq!(run(&["frobenius", "check", "/nonexistent.json"]).0, 2);
    assert_eq!(run(&["nonsense"]).0, 2);
}

#[test]
fn certificate_failures_exit_1() {
    let (code, r) = report(&["bracket", "compat", &data("incompatible.json")]);
    assert_eq!(code, 1);
    let failed: Vec<_> = r["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|c| c["witness"].is_string()));
    assert_eq!(report(&["pencil", "check", &data("nonflat.json")]).0, 1);
}

#[test]
fn reports_are_sorted_unique_and_deterministic() {
    for args in [
        vec!["coxeter", "--type", "A", "--rank", "2"],
        vec!["frobenius", "check", "DATA:cp1.json", "--fast", "--seed", "7"],
        vec!["bracket", "recurse", "DATA:n1-pencil.json", "--steps", "3"],
    ] {
        let args: Vec<String> = args
            .iter()
            .map(|a| a.strip_prefix("DATA:").map(data).unwrap_or_else(|| a.to_string()))
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, r) = report(&args);
        assert_eq!(code, 0);
        let n = names(&r);
        let mut sorted = n.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(n, sorted);
        let mut a = args.clone();
        a.push("--json");
        assert_eq!(run(&a).1, run(&a).1);
    }
}

#[test]
fn file_round_trip_through_pencil() {
    for m in ["n1.json", "a2.json", "a3.json", "cp1.json"] {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        let p1 = d.join("p1");
        let p2 = d.join("p2");
        assert_eq!(
            run(&["frobenius", "pencil", &data(m), "--out", p1.to_str().unwrap()]).0,
            0
        );
        let pencil = p1.join("pencil.json");
        assert_eq!(
            run(&[
                "pencil",
                "reconstruct",
                pencil.to_str().unwrap(),
                "--out",
                p2.to_str().unwrap()
            ])
            .0,
            0
        );
        let back = parse_frobenius(&std::fs::read_to_string(p2.join("frobenius.json")).unwrap()).unwrap();
        let orig = parse_frobenius(&std::fs::read_to_string(data(m)).unwrap()).unwrap();
        assert_eq!(back, orig, "{m}");
    }
}

#[test]
fn bracket_commands() {
    let (code, r) = report(&["bracket", "recurse", &data("n1-pencil.json"), "--steps", "2"]);
    assert_eq!(code, 0);
    // h'' = t h'' + h'/2: from t^2/4 the right side is 3t/4
    assert_eq!(
        r["results"]["chains"][0],
        serde_json::json!(["t1", "1/4*t1^2", "1/8*t1^3"])
    );
    let (code, r) = report(&["bracket", "central-charge", &data("a2.json"), "--coxeter-rank", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["central_charge"]["c_formula"], "24");
    assert_eq!(report(&["bracket", "virasoro", &data("n1.json")]).0, 0);
    assert_eq!(report(&["bracket", "virasoro", &data("cp1.json")]).0, 1);
    let (code, r) = report(&["bracket", "emit", &data("n1-pencil.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["g1"]["gamma"]["1,1,1"], "1/2");
}
