use std::process::{Command, Output};

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn qclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qclab")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn measure_reports_or2() {
    let out = qclab(&["measure", &data("or2.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "experiment,instance,quantity,value,provenance,sigma");
    assert!(lines.contains(&"measure,or2,D,2,exact,"));
    assert!(lines.contains(&"measure,or2,RS,3/2,exact,"));
    assert!(lines.contains(&"measure,or2,chibar lower bound,3/2,lower-bound,"));
}

#[test]
fn measure_with_distribution() {
    let dir = std::env::temp_dir().join(format!("qclab-mu-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mu = dir.join("mu.json");
    std::fs::write(&mu, r#"{"m": 2, "weights": {"00": "1/2", "11": "1/2"}}"#).unwrap();
    let out = qclab(&[
        "measure",
        &data("or2.json"),
        "--mu",
        mu.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    // One query separates 00 from 11.
    assert!(rows
        .iter()
        .any(|r| r["quantity"].as_str().unwrap().starts_with("D^mu") && r["value"] == "1"));
}

#[test]
fn verify_exit_codes() {
    let ok = qclab(&["verify", "walk", "--samples", "10"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stderr).contains("walk: pass (10 checks, 0 failed)"));
    assert_eq!(qclab(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn infeasible_probe_count() {
    let out = qclab(&["bench", "f0g0", "--n", "400"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("441"));
}

#[test]
fn input_errors() {
    assert_eq!(qclab(&["measure", &data("missing.json")]).status.code(), Some(2));
    assert_eq!(qclab(&["measure", &data("tree.txt")]).status.code(), Some(2));
    assert_eq!(
        qclab(&["measure", &data("or2.json"), "--epsilon", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(qclab(&["bench", "catalog", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn exact_process() {
    let out = qclab(&[
        "simulate",
        "process",
        "--tree",
        &data("tree.txt"),
        "--mixture",
        &data("mixture.json"),
        "--z",
        "01",
        "--exact",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // x1 = 0 w.p. 1/4 under mu1 at block 1; z2 = 1 routes through block 2.
    assert!(text.contains("simulate,z=01,leaf 2,1/4,exact,"), "{text}");
    assert!(text.contains("simulate,z=01,leaf 3,3/4,exact,"), "{text}");
    assert!(text.contains("simulate,z=01,leaf 5,0/1,exact,"), "{text}");
}

#[test]
fn sampled_process_and_log() {
    let dir = std::env::temp_dir().join(format!("qclab-log-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let log = dir.join("steps.txt");
    let report = dir.join("report.csv");
    let out = qclab(&[
        "simulate",
        "process",
        "--tree",
        &data("tree.txt"),
        "--mixture",
        &data("mixture.json"),
        "--z",
        "01",
        "--trials",
        "400",
        "--seed",
        "2",
        "--log",
        log.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains(",monte-carlo,")));
    let steps = std::fs::read_to_string(&log).unwrap();
    for line in steps.lines() {
        assert_eq!(line.split(", ").count(), 4, "{line}");
    }
    assert!(!steps.is_empty());
}

#[test]
fn experiment_specs() {
    let out = qclab(&["bench", "run", &data("simulation-check.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().count() > 1);
    let dir = std::env::temp_dir().join(format!("qclab-spec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"experiment": "measure-catalog", "colour": 1}"#).unwrap();
    assert_eq!(qclab(&["bench", "run", bad.to_str().unwrap()]).status.code(), Some(2));
}
