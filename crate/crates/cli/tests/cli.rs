use std::path::Path;
use std::process::{Command, Output};

use watermelon_cli::table::{emit, Format, Table, WALL_CLOCK_KEY};

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_watermelon"))
        .args(args)
        .current_dir(dir)
        .env("WATERMELON_CACHE_DIR", dir.join("cache"))
        .output()
        .expect("run watermelon")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_wall_clock(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with(&format!("# {WALL_CLOCK_KEY}="))).collect::<Vec<_>>().join("\n")
}

#[test]
fn height_table_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["height", "--N", "16", "--wall", "absorbing", "--k-grid", "-6:4:0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let t = Table::from_csv(&text).unwrap();
    assert_eq!(t.columns, ["k", "M", "cdf"]);
    assert_eq!(t.rows.len(), 101);
    assert_eq!(t.to_csv().unwrap(), text);
    assert!(text.lines().take_while(|l| l.starts_with('#')).any(|l| l == "# N=16"));
}

#[test]
fn output_is_deterministic_apart_from_wall_clock() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["dgop", "--n", "20", "--alpha", "0.25", "--a", "1.1", "--kmax", "12"];
    let (a, b) = (stdout(&run_in(dir.path(), &args)), stdout(&run_in(dir.path(), &args)));
    assert!(!a.is_empty());
    assert_eq!(without_wall_clock(&a), without_wall_clock(&b));
}

#[test]
fn json_rows_match_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["tw", "--which", "f2", "--xmin", "-4", "--xmax", "2", "--step", "0.5"];
    let csv = Table::from_csv(&stdout(&run_in(dir.path(), &args))).unwrap();
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&run_in(dir.path(), &json_args))).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), csv.rows.len());
    assert_eq!(json["columns"][1], "F2");
    assert_eq!(json["meta"]["which"], "F2");
}

#[test]
fn empty_table_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    assert!(emit(&Table::new(&["x"]), Format::Csv, Some(&path)).is_err());
    assert!(!path.exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run_in(dir.path(), args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["height", "--help"]), Some(0));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["tw", "--colour", "red"]), Some(1));
    assert_eq!(code(&["dgop", "--n", "ten", "--a", "1", "--kmax", "3"]), Some(4));
    assert_eq!(code(&["--tail-tol", "1e-3", "tw"]), Some(4));
    assert_eq!(code(&["height", "--N", "4", "--wall", "absorbing", "--k-grid", "0:1:0.5", "--m-grid", "1:2:1"]), Some(5));
    assert_eq!(code(&["-o", "/nonexistent-dir/x.csv", "tw"]), Some(3));
    assert_eq!(code(&["validate", "--suite", "nonsense"]), Some(4));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("watermelon.conf"), "# defaults for this directory\nformat = json\n").unwrap();
    let args = ["dgop", "--n", "8", "--a", "1", "--kmax", "2"];
    let from_file = stdout(&run_in(dir.path(), &args));
    assert!(from_file.trim_start().starts_with('{'));
    let mut flagged = args.to_vec();
    flagged.extend(["--format", "csv"]);
    assert!(stdout(&run_in(dir.path(), &flagged)).starts_with("# tool="));

    std::fs::write(dir.path().join("watermelon.conf"), "colour = red\n").unwrap();
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(1));
    std::fs::write(dir.path().join("watermelon.conf"), "format = csv\nformat = json\n").unwrap();
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(5));
    std::fs::write(dir.path().join("watermelon.conf"), "tail_tol = 1\n").unwrap();
    assert_eq!(run_in(dir.path(), &args).status.code(), Some(4));
}

#[test]
fn painleve_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["tw", "--xmin", "-1", "--xmax", "1", "--step", "1"];
    let first = stdout(&run_in(dir.path(), &args));
    let files: Vec<_> = std::fs::read_dir(dir.path().join("cache")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let stamp = std::fs::metadata(&files[0]).unwrap().modified().unwrap();
    let second = stdout(&run_in(dir.path(), &args));
    assert_eq!(std::fs::metadata(&files[0]).unwrap().modified().unwrap(), stamp);
    assert_eq!(without_wall_clock(&first), without_wall_clock(&second));
}

#[test]
fn failing_validation_exits_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["validate", "--suite", "painleve"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(Table::from_csv(&stdout(&o)).unwrap().rows.len(), 3);
    let o = run_in(dir.path(), &["validate", "--suite", "watermelon"]);
    let t = Table::from_csv(&stdout(&o)).unwrap();
    let any_fail = t.rows.iter().any(|r| r[2] == "fail".into());
    assert_eq!(o.status.code(), Some(if any_fail { 2 } else { 0 }));
}
