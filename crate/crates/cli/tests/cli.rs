use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn runchart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_runchart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn piston() -> Option<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/piston_rings.csv");
    path.exists().then(|| path.display().to_string())
}

fn chart_json(extra: &[&str]) -> (i32, Value) {
    let data = piston().expect("fixture present");
    let mut args = extra.to_vec();
    args.extend(["--input", &data, "--aggregate", "mean", "--alpha", "0.05"]);
    let out = runchart(&args);
    let json = serde_json::from_slice(&out.stdout).expect("json on stdout");
    (out.status.code().unwrap(), json)
}

#[test]
fn dist_runs_table() {
    let out = runchart(&["dist", "runs", "--n", "5", "--n1", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "2  0.6"), "{text}");
}

#[test]
fn dist_scan_tail() {
    let out = runchart(&["dist", "scan", "--n", "40", "--n1", "12", "--r", "10", "--s", "7"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "P(S>=7) = 0.0525");
}

#[test]
fn dist_json_is_full_precision() {
    let out = runchart(&["dist", "runs", "--n", "5", "--n1", "3", "--json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let p2 = rows.iter().find(|r| r["value"] == 2).unwrap()["prob"].as_f64().unwrap();
    assert!((p2 - 0.6).abs() < 1e-12);
}

#[test]
fn capacity_exits_3_and_mc_recovers() {
    let args = ["dist", "scan", "--n", "100", "--n1", "50", "--r", "25", "--s", "20"];
    let out = runchart(&args);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--mc"));

    let mut mc = args.to_vec();
    mc.extend(["--mc", "2000", "--seed", "7", "--json"]);
    let out = runchart(&mc);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["approximate"], true);
    assert_eq!(v["seed"], 7);
}

#[test]
fn piston_r1_signals() {
    if piston().is_none() {
        eprintln!("skipping: piston fixture missing");
        return;
    }
    let (code, v) = chart_json(&["chart", "r1", "--p0", "0.2"]);
    assert_eq!(code, 10);
    assert_eq!(v["n1"], 8);
    assert_eq!(v["observed"], 4);
    assert_eq!(v["limit"], 4);
    assert_eq!(v["signal"], true);
    let run = &v["localization"]["runs"][0];
    assert_eq!((run["start"].as_u64(), run["end"].as_u64()), (Some(37), Some(40)));
}

#[test]
fn piston_r2_signals() {
    if piston().is_none() {
        eprintln!("skipping: piston fixture missing");
        return;
    }
    let (code, v) = chart_json(&["chart", "r2", "--r", "6", "--p0", "0.2"]);
    assert_eq!(code, 10);
    assert_eq!((v["observed"].as_i64(), v["limit"].as_i64()), (Some(5), Some(5)));
    let union: Vec<u64> = v["localization"]["window_union"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(union, (34..=40).collect::<Vec<_>>());

    let (code, v) = chart_json(&["chart", "r2", "--r", "10", "--p0", "0.3"]);
    assert_eq!(code, 10);
    assert_eq!((v["observed"].as_i64(), v["limit"].as_i64()), (Some(7), Some(7)));
    let w = &v["localization"]["windows"][0];
    assert_eq!((w["start"].as_u64(), w["end"].as_u64()), (Some(31), Some(40)));
}

#[test]
fn record_round_trips_through_file() {
    let Some(data) = piston() else { return };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.json");
    let out = runchart(&[
        "chart", "r2", "--r", "6", "--p0", "0.2", "--input", &data, "--aggregate", "mean",
        "--alpha", "0.05", "--randomize", "--seed", "3", "--output", path.to_str().unwrap(),
    ]);
    assert!(matches!(out.status.code(), Some(0 | 10)));
    let text = std::fs::read_to_string(&path).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["input"]["sha256"].as_str().unwrap().len(), 64);
    assert!(v["draw"].is_f64());
    let again = serde_json::to_string_pretty(&v).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&again).unwrap(), v);

    let rerun = runchart(&[
        "chart", "r2", "--r", "6", "--p0", "0.2", "--input", &data, "--aggregate", "mean",
        "--alpha", "0.05", "--randomize", "--seed", "3",
    ]);
    let v2: Value = serde_json::from_slice(&rerun.stdout).unwrap();
    assert_eq!(v2["draw"], v["draw"]);
    assert_eq!(v2["signal"], v["signal"]);
}

#[test]
fn single_row_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    std::fs::write(&path, "1.5\n").unwrap();
    let out = runchart(&["chart", "r1", "--input", path.to_str().unwrap(), "--alpha", "0.05", "--p0", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_cell_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "1\n2\nabc\n4\n").unwrap();
    let out = runchart(&["chart", "r1", "--input", path.to_str().unwrap(), "--alpha", "0.05", "--p0", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('3'));
}

#[test]
fn constant_sample_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    std::fs::write(&path, "5\n5\n5\n5\n5\n5\n").unwrap();
    let out = runchart(&["chart", "r1", "--input", path.to_str().unwrap(), "--alpha", "0.05", "--p0", "0.3"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn localize_bits() {
    let out = runchart(&["localize", "--bits", "0000000111", "--r", "3", "--cutoff", "1.01", "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["windows"][0]["start"], 8);
    assert_eq!(v["runs"][0]["length"], 3);
}

#[test]
fn zero_shift_matches_in_control_scenario() {
    let base = ["simulate", "--family", "normal", "--n", "30", "--chart", "r1", "--alpha", "0.05", "--reps", "1000", "--seed", "11"];
    let mut a = base.to_vec();
    a.extend(["--scenario", "ii", "--delta", "0"]);
    let mut b = base.to_vec();
    b.extend(["--scenario", "ic", "--delta", "0"]);
    let (oa, ob) = (runchart(&a), runchart(&b));
    assert!(oa.status.success() && ob.status.success());
    let est = |o: &Output| {
        let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
        let rec = rdr.deserialize::<std::collections::HashMap<String, String>>().next().unwrap().unwrap();
        rec["estimate"].clone()
    };
    assert_eq!(est(&oa), est(&ob));
}

#[test]
fn oracle_matches_dist() {
    let out = runchart(&["oracle", "--n", "5", "--n1", "3", "--kind", "runs"]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().any(|l| l.starts_with("2  6  0.6")));
}
