use std::process::Command;

use hgop::diagnostics::{Verdict, VerdictReport};

fn hgop(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hgop")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn verdict_example_and_round_trip() {
    let (code, out, err) = hgop(&["verdict", "--g", "log", "--from", "D2:0.5", "--to", "D2:0.5"]);
    assert_eq!(code, 0, "{err}");
    let r: VerdictReport = serde_json::from_str(&out).unwrap();
    assert_eq!(r.verdict, Verdict::Bounded);
    assert_eq!(r.theorem, "2.2");
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();
    let again: serde_json::Value = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(value, again);
}

#[test]
fn apply_example() {
    let (code, out, _) = hgop(&["apply", "--g", "log", "--f", "poly:1", "-N", "4"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,re,im"));
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0].parse::<usize>().unwrap(), k);
        assert_eq!(cells[1].parse::<f64>().unwrap(), 1.0 / (k + 1) as f64);
        assert_eq!(cells[2].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn apply_to_file() {
    let path = std::env::temp_dir().join(format!("hgop-apply-{}.csv", std::process::id()));
    let (code, out, _) = hgop(&["apply", "--g", "power:0", "--f", "poly:1", "-N", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 5);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn opnorm_example() {
    let (code, out, _) = hgop(&["opnorm", "--g", "log", "--alpha", "1", "--beta", "1", "--truncations", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("N,norm"));
    let (n, v) = out.lines().nth(1).unwrap().split_once(',').unwrap();
    assert_eq!(n, "1");
    let exact = 2.0 / 3.0 + 13f64.sqrt() / 6.0;
    assert!((v.parse::<f64>().unwrap() - exact).abs() < 1e-7);
}

#[test]
fn json_curve_round_trips() {
    let (code, out, _) = hgop(&["--json", "opnorm", "--g", "log", "--alpha", "0.5", "--beta", "0.5", "--truncations", "2^2..2^5"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 4);
    let again: serde_json::Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, again);
}

#[test]
fn no_theorem_exits_two() {
    let (code, _, err) = hgop(&["verdict", "--g", "log", "--from", "W", "--to", "B"]);
    assert_eq!(code, 2);
    assert!(err.contains("no theorem applies"), "{err}");
}

#[test]
fn usage_error_exits_two() {
    assert_eq!(hgop(&["opnorm", "--g", "log"]).0, 2);
}

#[test]
fn deterministic_output() {
    let args = ["means", "--f", "cayley:0.5", "-p", "1", "--depth", "8"];
    let (a, b) = (hgop(&args), hgop(&args));
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}

#[test]
fn verify_reports_certificate() {
    let (code, out, err) = hgop(&["verify", "lemma42", "--c", "1", "--beta", "1", "--depth", "14"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.starts_with("lemma42: PASS"));
    assert_eq!(out.lines().count(), 16);
}
