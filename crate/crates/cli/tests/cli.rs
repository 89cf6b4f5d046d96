use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proxgrip_core::ScenarioConfig;

const TIMESERIES_HEADER: &str = "t,x1,x2,v1,v2,u1,u2,fc1,fc2,xi1,xi2,fs,fp1,fp2,xv2,xv1_1,xv1_2";

fn proxgrip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proxgrip"))
        .args(args)
        .output()
        .expect("binary should start")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Header and data rows of a CSV file, after its comment line.
fn read_csv(path: &Path) -> (String, Vec<csv::StringRecord>) {
    let text = fs::read_to_string(path).unwrap();
    let (comment, body) = text.split_once('\n').unwrap();
    assert!(comment.starts_with("# proxgrip "), "{comment}");
    assert!(comment.contains("config-sha256="), "{comment}");
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader
        .headers()
        .unwrap()
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    let rows = reader.records().map(Result::unwrap).collect();
    (header, rows)
}

fn field<'a>(header: &str, row: &'a csv::StringRecord, name: &str) -> &'a str {
    let idx = header.split(',').position(|h| h == name).unwrap();
    &row[idx]
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_case2_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = proxgrip(&["run", "--case", "2", "--t-end", "3", "--out", out]);
    assert!(res.status.success(), "{}", stderr(&res));

    let (header, rows) = read_csv(&dir.path().join("timeseries.csv"));
    assert_eq!(header, TIMESERIES_HEADER);
    assert_eq!(rows.len(), 30_000);

    let (header, rows) = read_csv(&dir.path().join("report.csv"));
    assert_eq!(rows.len(), 1);
    let dt: f64 = field(&header, &rows[0], "time_difference_of_contact")
        .parse()
        .unwrap();
    assert!(dt <= 0.05, "{dt}");
    assert_eq!(field(&header, &rows[0], "status"), "ok");
}

#[test]
fn case0_reports_impact_speed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = proxgrip(&[
        "run", "--case", "0", "--xm", "0.03", "--t-end", "1", "--out", out,
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let (header, rows) = read_csv(&dir.path().join("report.csv"));
    let v: f64 = field(&header, &rows[0], "v_impact1").parse().unwrap();
    assert!(v > 0.1, "{v}");
}

#[test]
fn missing_config_names_path() {
    let res = proxgrip(&["run", "--config", "/definitely/not/here.toml"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("/definitely/not/here.toml"));
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[controller.layer1]\nstifness = 98.0\n");
    let res = proxgrip(&["validate", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("stifness"), "{}", stderr(&res));
}

#[test]
fn zero_width_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[plant.object]\ncenter = 0.03\nwidth = 0.0\n");
    let res = proxgrip(&["validate", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(1));
    assert!(
        stderr(&res).contains("W must be positive"),
        "{}",
        stderr(&res)
    );
}

#[test]
fn finger_inside_object_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[plant]\nx_init = [0.01, -0.11]\n");
    let res = proxgrip(&["validate", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(1));
    assert!(
        stderr(&res).contains("finger 1 must start outside the object"),
        "{}",
        stderr(&res)
    );
}

#[test]
fn every_violation_is_listed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[plant]\nmass = -1.0\n[controller.layer2]\nd_p2 = 0.6\n",
    );
    let res = proxgrip(&["validate", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(1));
    let err = stderr(&res);
    assert!(err.contains("plant.mass"), "{err}");
    assert!(err.contains("d_p2"), "{err}");
}

#[test]
fn divergence_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[controller.layer1]\nstiffness = 1e12\n");
    let out = dir.path().to_str().unwrap();
    let res = proxgrip(&["run", "--config", &cfg, "--case", "0", "--out", out]);
    assert_eq!(res.status.code(), Some(2), "{}", stderr(&res));
    assert!(stderr(&res).contains("diverged"));

    // A sweep only fails when every cell does.
    let res = proxgrip(&["sweep", "impact", "--config", &cfg, "--out", out]);
    assert_eq!(res.status.code(), Some(2), "{}", stderr(&res));
    let (_, rows) = read_csv(&dir.path().join("sweep_impact.csv"));
    assert_eq!(rows.len(), 3);
}

#[test]
fn validate_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let res = proxgrip(&[
        "validate", "--case", "1", "--xm", "0.02", "--alpha1", "0.86", "--alpha2", "1.0",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let printed = stdout(&res);
    let first = ScenarioConfig::from_toml(&printed).unwrap();

    let cfg = write_config(dir.path(), &printed);
    let again = proxgrip(&["validate", "--config", &cfg]);
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(stdout(&again), printed);
    assert_eq!(ScenarioConfig::from_toml(&stdout(&again)).unwrap(), first);
    assert_eq!(first.plant.object.center, 0.02);
}

fn sweep_rows(kind: &str) -> (String, Vec<csv::StringRecord>, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = proxgrip(&["sweep", kind, "--t-end", "3", "--out", out]);
    assert!(res.status.success(), "{}", stderr(&res));
    let (header, rows) = read_csv(&dir.path().join(format!("sweep_{kind}.csv")));
    (header, rows, stdout(&res))
}

#[test]
fn sweeps_have_expected_row_counts_and_shared_header() {
    let (position, rows, table) = sweep_rows("position");
    assert_eq!(rows.len(), 12);
    assert!(table.lines().any(|l| l.trim_start().starts_with("case")));

    let (reflectance, rows, _) = sweep_rows("reflectance");
    assert_eq!(rows.len(), 7);
    let (impact, rows, _) = sweep_rows("impact");
    assert_eq!(rows.len(), 3);
    let cases: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(cases, ["0", "1", "2"]);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(proxgrip(&["run", "--t-end", "0.5", "--out", out])
        .status
        .success());
    let (report, _) = read_csv(&dir.path().join("report.csv"));

    assert_eq!(position, reflectance);
    assert_eq!(position, impact);
    assert_eq!(position, report);
    assert_eq!(position.split(',').count(), 19);
}

#[test]
fn table_rounds_times_to_centiseconds() {
    let (_, _, table) = sweep_rows("impact");
    let row = table
        .lines()
        .find(|l| l.trim_start().starts_with('2'))
        .unwrap();
    let t1 = row.split_whitespace().nth(4).unwrap();
    assert_eq!(t1.split('.').nth(1).map(str::len), Some(2), "{row}");
}
