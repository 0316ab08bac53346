use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const EXE: &str = env!("CARGO_BIN_EXE_ergodic-insurance");

fn canonical() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/canonical.json")
}

fn run(args: &[&str]) -> Output {
    Command::new(EXE).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn with_scenario(edit: impl FnOnce(&mut Value)) -> tempfile::NamedTempFile {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(canonical()).unwrap()).unwrap();
    edit(&mut v);
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), v.to_string()).unwrap();
    file
}

#[test]
fn evaluate_expected_wealth_json() {
    let path = canonical();
    let json = stdout_json(&run(&[
        "evaluate",
        path.to_str().unwrap(),
        "--paradigm",
        "ew",
        "--format",
        "json",
    ]));
    let table = &json["expected_wealth"];
    assert_eq!(table["owner"]["difference"].as_f64(), Some(-100.0));
    assert_eq!(table["insurer"]["difference"].as_f64(), Some(100.0));
    assert_eq!(table["owner"]["insured"].as_f64(), Some(2200.0));
    assert_eq!(table["owner"]["uninsured"].as_f64(), Some(2300.0));
}

#[test]
fn evaluate_text_golden() {
    let path = canonical();
    let out = run(&["evaluate", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = |table: &str, label: &str| -> Vec<String> {
        let section = text.split("\n\n").find(|s| s.starts_with(table)).unwrap();
        let line = section.lines().find(|l| l.starts_with(label)).unwrap();
        line.split_whitespace().skip(1).map(str::to_string).collect()
    };
    assert_eq!(row("Expected wealth", "difference"), ["-100.0", "100.0"]);
    assert_eq!(row("Expected wealth", "insured"), ["2200", "100.0"]);
    assert_eq!(row("Expected utility", "uninsured"), ["3.367", "0"]);
    assert_eq!(row("Expected utility", "insured"), ["3.460", "0.04303"]);
    assert_eq!(row("Time-average", "insured"), ["2.176%", "0.007197%"]);
    assert_eq!(row("Time-average", "uninsured"), ["1.943%", "0%"]);
    assert_eq!(row("Time-average", "difference"), ["0.2336%", "0.007197%"]);
}

#[test]
fn evaluate_csv_is_raw_per_month() {
    let path = canonical();
    let out = run(&[
        "evaluate",
        path.to_str().unwrap(),
        "--paradigm",
        "ta",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let owner_diff = text
        .lines()
        .find(|l| l.contains(",owner,difference,"))
        .and_then(|l| l.split(',').nth(3))
        .and_then(|v| v.parse::<f64>().ok())
        .unwrap();
    assert!((owner_diff - 0.002335561482832079).abs() < 1e-15);
}

#[test]
fn solve_reports_interval() {
    let path = canonical();
    let json = stdout_json(&run(&[
        "solve",
        path.to_str().unwrap(),
        "--paradigm",
        "ta",
        "--format",
        "json",
    ]));
    assert_eq!(json["win_win"]["kind"], "proper");
    let lo = json["win_win"]["lower"].as_f64().unwrap();
    let hi = json["win_win"]["upper"].as_f64().unwrap();
    assert!((lo - 1728.028).abs() < 0.01, "{lo}");
    assert!((hi - 2038.416).abs() < 0.01, "{hi}");
    assert_eq!(json["net_premium"].as_f64(), Some(1700.0));
}

#[test]
fn single_insured_round_is_exact() {
    let path = canonical();
    let json = stdout_json(&run(&[
        "simulate",
        path.to_str().unwrap(),
        "--rounds",
        "1",
        "--trajectories",
        "1",
        "--seed",
        "7",
        "--insured",
        "--format",
        "json",
    ]));
    let growth = json["growth"].as_f64().unwrap();
    assert_eq!(Some(growth), json["closed_form"].as_f64());
    assert!((growth - 1.022f64.ln()).abs() < 1e-16);
}

#[test]
fn simulate_is_reproducible() {
    let path = canonical();
    let args = [
        "simulate",
        path.to_str().unwrap(),
        "--rounds",
        "200",
        "--trajectories",
        "50",
        "--seed",
        "11",
        "--ruin-threshold",
        "0.5",
        "--format",
        "json",
    ];
    let a = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn sweep_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let path = canonical();
    let out = run(&[
        "sweep",
        path.to_str().unwrap(),
        "--paradigm",
        "ta",
        "--min",
        "1700",
        "--max",
        "1800",
        "--steps",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "fee,owner_delta,insurer_delta,owner_bankrupt,insurer_bankrupt"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1.7e3,"));
    assert!(lines[2].starts_with("1.8e3,"));
}

#[test]
fn limit_prints_slope() {
    let path = canonical();
    let out = run(&["limit", path.to_str().unwrap(), "--wealth-grid", "1e6:1e9:10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("-1.00"), "{text}");
}

#[test]
fn exit_codes_and_error_categories() {
    let bad = with_scenario(|v| v["loss_probability"] = 1.5.into());
    let out = run(&["evaluate", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("loss_probability"));

    let missing = with_scenario(|v| {
        v.as_object_mut().unwrap().remove("fee");
    });
    let out = run(&["evaluate", missing.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fee"));

    let out = run(&["evaluate", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));

    let poor = with_scenario(|v| v["insurer_wealth"] = 20000.into());
    let out = run(&["evaluate", poor.path().to_str().unwrap(), "--paradigm", "ta"]);
    assert_eq!(out.status.code(), Some(3));
    // sweeps report bankruptcy as values instead
    let out = run(&[
        "sweep",
        poor.path().to_str().unwrap(),
        "--paradigm",
        "ta",
        "--min",
        "0",
        "--max",
        "100",
        "--steps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains(",-inf,0,1"));

    let path = canonical();
    let out = run(&["limit", path.to_str().unwrap(), "--wealth-grid", "1e6:1e6:10"]);
    assert_eq!(out.status.code(), Some(4));
}
