//! End-to-end checks of the installed binary: flag surface, exit codes,
//! output formats, and byte-for-byte reproducibility.

use std::process::{Command, Output};

fn qpfourier(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpfourier"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sweep_prints_a_csv_table() {
    let out = qpfourier(&[
        "sweep",
        "--prime",
        "2",
        "--spec",
        "random:level=3,window=1,seed=7",
        "--k-max",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "p,spec,mode_param,t,l2_error,bound,sup_error,runtime_ms"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("2,\"random:level=3,window=1,seed=7\",0,2,"));
    assert!(lines[4].starts_with("2,\"random:level=3,window=1,seed=7\",3,2,0,"));
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "target",
        "--prime",
        "3",
        "--spec",
        "random:level=2,window=1,seed=11",
        "--n-list",
        "1,2,4,8",
        "--format",
        "json",
    ];
    let first = qpfourier(&args);
    let second = qpfourier(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn target_json_embeds_reports() {
    let out = qpfourier(&[
        "target",
        "--prime",
        "2",
        "--spec",
        "indicator:center=1/2,level=-1",
        "--n-list",
        "4,2",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["mode_param"], 2, "rows come out N-ascending");
    assert_eq!(rows[1]["mode_param"], 4);
    for row in rows {
        assert_eq!(row["report"]["t"], 2);
        assert!(row["report"]["per_coset_errors"].as_array().unwrap().len() == 2);
        assert!(row["report"]["bound"].as_f64().unwrap() > 0.0);
        assert_eq!(row["report"]["runtime_ms"], 0.0);
    }
}

#[test]
fn timings_flag_fills_runtime() {
    let out = qpfourier(&[
        "sweep",
        "--prime",
        "2",
        "--spec",
        "random:level=4,window=0,seed=3",
        "--k-max",
        "4",
        "--format",
        "json",
        "--timings",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let any_nonzero = rows
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["report"]["runtime_ms"].as_f64().unwrap() > 0.0);
    assert!(
        any_nonzero,
        "timed runs should report at least one nonzero duration"
    );
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let args_base = [
        "sweep",
        "--prime",
        "5",
        "--spec",
        "random:level=1,window=1,seed=2",
        "--k-max",
        "1",
    ];
    let piped = qpfourier(&args_base);
    let mut args_file: Vec<&str> = args_base.to_vec();
    let path_str = path.to_str().unwrap();
    args_file.extend_from_slice(&["--out", path_str]);
    let written = qpfourier(&args_file);
    assert_eq!(written.status.code(), Some(0));
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), piped.stdout);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["sweep", "--prime", "4", "--spec", "sum()", "--k-max", "1"],
        vec![
            "sweep",
            "--prime",
            "2",
            "--spec",
            "blur:level=1",
            "--k-max",
            "1",
        ],
        vec![
            "sweep",
            "--prime",
            "2",
            "--spec",
            "indicator:center=1/3,level=0",
            "--k-max",
            "1",
        ],
        vec!["target", "--prime", "2", "--spec", "sum()", "--n-list", "0"],
        vec!["sweep", "--prime", "2", "--spec", "sum()"],
    ] {
        let out = qpfourier(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "args {args:?}: {}",
            stdout(&out)
        );
        assert!(out.stdout.is_empty(), "no table on config errors");
    }
}

#[test]
fn io_errors_exit_3() {
    let out = qpfourier(&[
        "sweep",
        "--prime",
        "2",
        "--spec",
        "sum()",
        "--k-max",
        "0",
        "--out",
        "/nonexistent-dir/rows.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("I/O"), "stderr: {err}");
}

#[test]
fn zero_function_runs_clean() {
    let out = qpfourier(&[
        "target", "--prime", "3", "--spec", "sum()", "--n-list", "1,8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        assert!(line.contains(",0,0,"), "all-zero errors expected: {line}");
    }
}
