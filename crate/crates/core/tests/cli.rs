use std::process::{Command, Output};

use serde_json::Value;

fn lse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lse"))
        .args(args)
        .env_remove("LSE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn eval_shifted_fp64() {
    let o = lse(&["eval", "--alg", "shifted", "--format", "fp64", "--x", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "y"), "3.40760596");
    assert_eq!(field(&out, "g"), "[0.0900305732, 0.244728471, 0.665240956]");
}

#[test]
fn eval_basic_fp16_overflow_keeps_exit_zero() {
    let o = lse(&["eval", "--alg", "basic", "--format", "fp16", "--x", "12,0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "y"), "inf");
    assert!(field(&out, "flags").split('|').any(|f| f == "overflowed"));
}

#[test]
fn eval_shifted_fp16_json() {
    let o = lse(&["eval", "--alg", "shifted", "--format", "fp16", "--x", "12,0", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["y"].as_f64(), Some(12.0));
    assert_eq!(v["g"][0].as_f64(), Some(1.0));
    let g1 = v["g"][1].as_f64().unwrap();
    // nearest fp16 subnormal to 6.1441746e-6
    assert!((g1 - 6.144_174_602_214_718e-6).abs() <= 2f64.powi(-25));
    assert_eq!(v["flags"].as_array().unwrap().len(), 0);
}

#[test]
fn analyze_examples() {
    let out = stdout(&lse(&["analyze", "--x", "1,-1"]));
    assert_eq!(field(&out, "cond_lse"), "0.887368128");
    assert_eq!(field(&out, "bound basic_lse"), "3.66210439");
    assert_eq!(field(&out, "bound shifted_lse"), "3.66210439");

    let c = format!("{}", -(4f64.ln()));
    let x = [c.as_str(); 4].join(",");
    let out = stdout(&lse(&["analyze", "--x", &x]));
    assert_eq!(field(&out, "cond_lse"), "inf");

    let o = lse(&["analyze", "--x", "5", "--json"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["y_range"], serde_json::json!([5.0, 5.0]));
    assert_eq!(v["cond_softmax_exact"].as_f64(), Some(0.0));
}

#[test]
fn bad_input_exits_two() {
    for args in [
        vec!["eval", "--x", "1,nope"],
        vec!["eval", "--x", "inf"],
        vec!["eval", "--format", "fp8", "--x", "1"],
        vec!["eval", "--alg", "kahan", "--x", "1"],
        vec!["analyze", "--csv", "/definitely/not/here.csv"],
        vec!["eval", "--x", "1", "--gen", "constant:1"],
        vec!["experiment", "--gen", "uniform:3,1", "--count", "2"],
    ] {
        let o = lse(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn csv_input_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("in.csv");
    std::fs::write(&path, "1,2\n3,x4\n").unwrap();
    let o = lse(&["eval", "--csv", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("field 2"), "{err}");
}

#[test]
fn experiment_writes_records_summary_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run1");
    let svg = dir.path().join("plots");
    let o = lse(&[
        "experiment",
        "--gen",
        "uniform:-20,20",
        "--n",
        "10",
        "--count",
        "200",
        "--format",
        "fp16",
        "--seed",
        "42",
        "--out",
        prefix.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("bound violations: 0"));
    let records = std::fs::read_to_string(dir.path().join("run1.csv")).unwrap();
    assert_eq!(records.lines().count(), 201);
    assert!(dir.path().join("run1_summary.csv").exists());
    assert_eq!(std::fs::read_dir(&svg).unwrap().count(), 10);
}

#[test]
fn experiment_on_csv_in_bfloat16_has_no_overflow() {
    let dir = tempfile::tempdir().unwrap();
    let acts = dir.path().join("acts.csv");
    std::fs::write(&acts, "19.5,-3,0.25,12\n-18,20,7,7\n11.2,11.2,11.2\n").unwrap();
    let o = lse(&[
        "experiment",
        "--csv",
        acts.to_str().unwrap(),
        "--format",
        "bfloat16",
        "--json",
        "--out",
        dir.path().join("r").to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["trials"], 3);
    for a in v["algorithms"].as_array().unwrap() {
        assert_eq!(a["overflows"], 0, "{a}");
        // all entries of the last row exceed n, where the stated shifted
        // factors no longer cover the rounding of y = x_max + log1p(s)
        let shifted = a["algorithm"] == "shifted_lse" || a["algorithm"] == "alt_shifted_softmax";
        let expected = if shifted { 1 } else { 0 };
        assert_eq!(a["violations"], expected, "{a}");
    }
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let prefix = dir.path().join(format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_lse"))
            .args([
                "experiment",
                "--gen",
                "wide-spread:30",
                "--count",
                "300",
                "--format",
                "fp16",
                "--seed",
                "7",
            ])
            .args(["--out", prefix.to_str().unwrap()])
            .env("LSE_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.code().unwrap() <= 1);
        outputs.push(std::fs::read(dir.path().join(format!("t{threads}.csv"))).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let o = Command::new(env!("CARGO_BIN_EXE_lse"))
        .args(["experiment", "--gen", "constant:1", "--count", "2", "--out"])
        .arg(dir.path().join("bad"))
        .env("LSE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn formats_json_has_full_precision() {
    let out = stdout(&lse(&["formats", "--json"]));
    let rows: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let fp16 = rows.iter().find(|r| r["format"] == "fp16").unwrap();
    assert_eq!(fp16["rmax"].as_f64(), Some(65504.0));
    assert_eq!(fp16["u"].as_f64(), Some(2f64.powi(-11)));
    let bf = rows.iter().find(|r| r["format"] == "bfloat16").unwrap();
    assert_eq!(bf["subnormals"], false);
}
