use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bergman-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with_threads(threads: &str, args: &[&str]) -> Output {
    bin().env("BERGMAN_LAB_THREADS", threads).args(args).output().expect("binary runs")
}

#[test]
fn dilation_spectrum_rows() {
    let out = run(&[
        "spectrum",
        "--ambient",
        "disc",
        "--region",
        r#"{"kind":"DilatedCopy","params":{"rho":0.5}}"#,
        "--orders",
        "8",
        "--output",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for (k, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.25f64.powi(k as i32 + 1));
    }
}

#[test]
fn triangle_trace_json() {
    let out = run(&["trace", "--ambient", "disc", "--region", "ideal-triangle", "--output", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - 0.25).abs() <= 0.02 * 0.25, "{value}");
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["spectrum", "--region", "ideal-triangle", "--orders", "8", "--output", "csv"];
    let a = run_with_threads("1", &args);
    let b = run_with_threads("4", &args);
    let c = run_with_threads("4", &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);

    let cmp = ["compare", "--case", "ball", "--seed", "11", "--output", "json"];
    assert_eq!(run(&cmp).stdout, run(&cmp).stdout);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.svg");
    let args = ["sweep", "--region", "strip:0.25,0.5", "--orders", "8,16", "--output", "svg"];
    let direct = run(&args);
    let mut with_out: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let written = run(&with_out);
    assert!(written.status.success());
    assert!(written.stdout.is_empty());
    let file = std::fs::read(Path::new(p)).unwrap();
    assert_eq!(file, direct.stdout);
    let svg = String::from_utf8(file).unwrap();
    assert!(svg.contains("N=8") && svg.contains("N=16") && svg.contains("oracle hi"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"ambient": "disc", "region": {"kind": "DilatedCopy", "params": {"rho": 0.5}}, "orders": [3], "output": "csv"}"#,
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let from_file = String::from_utf8(run(&["spectrum", "--config", cfg]).stdout).unwrap();
    assert_eq!(from_file.lines().count(), 4);
    let overridden = String::from_utf8(run(&["spectrum", "--config", cfg, "--orders", "5"]).stdout).unwrap();
    assert_eq!(overridden.lines().count(), 6);
}

#[test]
fn exit_statuses() {
    let bad_region = run(&["spectrum", "--region", "{\"kind\": \"Nope\"}"]);
    assert_eq!(bad_region.status.code(), Some(2));

    let bad_flag = run(&["spectrum", "--no-such-flag"]);
    assert_eq!(bad_flag.status.code(), Some(2));

    let bad_threads = run_with_threads("zero", &["oracle", "--case", "horostrip", "--rho1", "0.25", "--rho2", "0.5"]);
    assert_eq!(bad_threads.status.code(), Some(2));

    let divergent = run(&["trace", "--region", "horodisc:0.5"]);
    assert_eq!(divergent.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&divergent.stderr).unwrap();
    assert_eq!(err["error"], "non_trace_class");
    assert!(err["ring_contributions"].as_array().unwrap().len() >= 6);

    let invalid = run(&["oracle", "--case", "horostrip", "--rho1", "0.5", "--rho2", "0.25"]);
    assert_eq!(invalid.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&invalid.stderr).unwrap();
    assert!(err["message"].is_string());
}

#[test]
fn compare_reports_and_exits_zero() {
    let out = run(&["compare", "--case", "horostrip", "--output", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("case,quantity,relation,numeric,oracle,tolerance,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn oracle_cases() {
    let out = run(&["oracle", "--case", "dilation", "--ambient", "ball:2", "--rho", "0.5", "--output", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "quantity,value\nfirst,6.2500000000000000e-2\nratio,2.5000000000000000e-1\n");

    let out = run(&["oracle", "--case", "lune", "--region", "lune:0,0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["hi"].as_f64(), Some(1.0));
}
