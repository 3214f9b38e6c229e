use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn ridenuc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ridenuc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_rsp_prints_the_plan() {
    let v = json(&ridenuc(&[
        "solve-rsp",
        data("prob10d.txt").to_str().unwrap(),
    ]));
    let blocks: Vec<Value> = v["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["members"].clone())
        .collect();
    let want: Value = serde_json::from_str("[[1],[2,3,4,6],[7],[5,8],[9],[10]]").unwrap();
    assert_eq!(Value::Array(blocks), want);
    let total: f64 = v["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["cost"].as_f64().unwrap())
        .sum();
    assert!((total - v["cost"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn nucleolus_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = ridenuc(&[
        "nucleolus",
        data("prob10c.txt").to_str().unwrap(),
        "--mode",
        "approx",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let y: Vec<f64> = serde_json::from_value(v["allocation"].clone()).unwrap();
    assert!((y.iter().sum::<f64>() - v["grand_cost"].as_f64().unwrap()).abs() < 1e-6);
    let count = v["generated_count"].as_u64().unwrap() as f64;
    assert_eq!(v["fraction"].as_f64().unwrap(), count / 1022.0);
    assert_eq!(v["mode"], "approx");
}

#[test]
fn csv_summary_has_header_and_stage_rows() {
    let table = data("three_player_empty_core.json");
    let csv = ridenuc(&[
        "nucleolus",
        table.to_str().unwrap(),
        "--capacity",
        "2",
        "--format",
        "csv",
    ]);
    let js = json(&ridenuc(&[
        "nucleolus",
        table.to_str().unwrap(),
        "--capacity",
        "2",
    ]));
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("stage,level,"));
    assert_eq!(
        text.lines().count(),
        js["stages"].as_array().unwrap().len() + 1
    );
}

#[test]
fn reference_allocation_adds_a_solution_path() {
    let dir = tempfile::tempdir().unwrap();
    let table = data("three_player_empty_core.json");
    let first = json(&ridenuc(&[
        "nucleolus",
        table.to_str().unwrap(),
        "--capacity",
        "2",
    ]));
    let reference = dir.path().join("ref.json");
    std::fs::write(&reference, first["allocation"].to_string()).unwrap();
    let v = json(&ridenuc(&[
        "nucleolus",
        table.to_str().unwrap(),
        "--capacity",
        "2",
        "--reference",
        reference.to_str().unwrap(),
    ]));
    let path = v["solution_path"].as_array().unwrap();
    assert!(!path.is_empty());
    assert!(path.last().unwrap()["distance"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["nucleolus", "", "--mode", "exact", "--fixation", "dual"];
    let input = data("prob10d.txt");
    let mut a = args;
    a[1] = input.to_str().unwrap();
    assert_eq!(ridenuc(&a).stdout, ridenuc(&a).stdout);
}

#[test]
fn core_command_reports_emptiness() {
    let table = data("three_player_empty_core.json");
    let v = json(&ridenuc(&[
        "core",
        table.to_str().unwrap(),
        "--capacity",
        "2",
    ]));
    assert_eq!(v["nonempty"], false);
    let v = json(&ridenuc(&[
        "core",
        data("three_player_nonempty_core.json").to_str().unwrap(),
    ]));
    assert_eq!(v["nonempty"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2 1\n1 0 0 1 1\n").unwrap();
    assert_eq!(
        ridenuc(&["nucleolus", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let partial = dir.path().join("partial.json");
    std::fs::write(
        &partial,
        r#"{"n": 2, "coalitions": [{"members": [1], "cost": 1}]}"#,
    )
    .unwrap();
    let out = ridenuc(&["nucleolus", partial.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));

    let wide = ridenuc(&[
        "nucleolus",
        data("prob10c.txt").to_str().unwrap(),
        "--capacity",
        "9",
    ]);
    assert_eq!(wide.status.code(), Some(3));

    let big = dir.path().join("big.txt");
    let mut text = String::from("17 2\n");
    for i in 1..=17 {
        text.push_str(&format!("{i} {i} 0 0 {i}\n"));
    }
    std::fs::write(&big, text).unwrap();
    assert_eq!(
        ridenuc(&["solve-rsp", big.to_str().unwrap()]).status.code(),
        Some(3)
    );

    let unknown = ridenuc(&[
        "nucleolus",
        data("prob10c.txt").to_str().unwrap(),
        "--mode",
        "fast",
    ]);
    assert_eq!(unknown.status.code(), Some(2));
}
