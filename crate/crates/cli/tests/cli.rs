use std::path::PathBuf;
use std::process::Command;

use bykov::orbit::{self, ClassifySettings, MapScanSpec};
use bykov::resonance;
use bykov::{Axis, MapConstants, Params};
use bykov_cli::output::parse_csv;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn bykov(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_bykov"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bykov-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn error_record(r: &Run) -> Value {
    let line = r.stderr.lines().last().expect("error line");
    serde_json::from_str(line).expect("machine-readable error")
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

#[test]
fn fixed_points_json_matches_library() {
    let r = bykov(&[
        "fixed-points", "--delta", "3", "--K", "1", "--ell", "1", "--A", "0.35", "--lambda", "0.05",
        "--omega", "8",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let c = MapConstants::from_delta_k(3.0, 1.0).unwrap();
    let records = resonance::fixed_points(&Params::new(0.35, 0.05, 8.0), &c, 1).unwrap();
    let emitted = v["fixed_points"].as_array().unwrap();
    assert_eq!(emitted.len(), 2);
    assert_eq!(emitted, serde_json::to_value(&records).unwrap().as_array().unwrap());
    for (e, rec) in emitted.iter().zip(&records) {
        assert!(same(e["x"].as_f64().unwrap(), rec.x));
        assert!(same(e["det"].as_f64().unwrap(), rec.det));
    }
}

#[test]
fn delta_at_most_one_is_rejected() {
    let r = bykov(&["constants", "--delta", "1"]);
    assert_eq!(r.code, 2);
    let e = error_record(&r);
    assert_eq!(e["error"]["kind"], "validation");
    assert!(e["error"]["message"].as_str().unwrap().contains("not weakly attracting"));
}

#[test]
fn surfaces_lists_missing_keys() {
    let r = bykov(&["surfaces", "--A", "0:0.5", "--lambda", "0:0.1"]);
    assert_eq!(r.code, 2);
    let msg = error_record(&r)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("--omega"), "{msg}");
    assert!(!msg.contains("--lambda"), "{msg}");
}

#[test]
fn lambda_above_a_warns_and_proceeds() {
    let r = bykov(&["wedge", "--A", "0.05", "--lambda", "0.1", "--omega", "6", "--K", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("outside 𝒱"), "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(v["membership"].is_string());
}

#[test]
fn bad_ranges_and_flags_are_usage_errors() {
    for args in [
        &["surfaces", "--A", "0.5:0", "--lambda", "0:0.1", "--omega", "1:2"][..],
        &["surfaces", "--A", "0:0.5", "--lambda", "0:0.1", "--omega", "1:2", "--grid", "0,2,2"],
        &["constants", "--no-such-flag", "1"],
        &["no-such-command"],
    ] {
        let r = bykov(args);
        assert_eq!(r.code, 2, "{args:?}");
        assert_eq!(error_record(&r)["error"]["kind"], "usage", "{args:?}");
    }
}

#[test]
fn grid_csv_needs_out() {
    let r = bykov(&["scan-map", "--A", "0:0.5", "--lambda", "0.1", "--omega", "1:2", "--grid", "2,2"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--out"));
}

#[test]
fn zero_threads_rejected() {
    let r = bykov(&["--threads", "0", "constants"]);
    assert_eq!(r.code, 2);
    assert_eq!(error_record(&r)["error"]["kind"], "validation");
}

#[test]
fn unwritable_output_is_io_error() {
    let r = bykov(&["--out", "/nonexistent-dir/x.json", "constants"]);
    assert_eq!(r.code, 1);
    assert_eq!(error_record(&r)["error"]["kind"], "io");
}

#[test]
fn help_exits_zero() {
    let r = bykov(&["--help"]);
    assert_eq!(r.code, 0);
    for sub in ["scan-map", "ode-scan", "ode-check", "manifolds"] {
        assert!(r.stdout.contains(sub));
    }
}

const SCAN: [&str; 14] = [
    "scan-map", "--K", "2", "--A", "0:0.5", "--lambda", "0.1", "--omega", "4:7", "--grid", "3,4",
    "--n", "400", "--seeds",
];

fn scan_args<'a>(out: &'a str, threads: &'a str) -> Vec<&'a str> {
    let mut a = vec!["--out", out, "--threads", threads, "--seed", "7"];
    a.extend(SCAN);
    a.extend(["2", "--transient", "100"]);
    a
}

#[test]
fn scan_csv_round_trips_bit_for_bit() {
    let dir = scratch("roundtrip");
    let path = dir.join("scan.csv");
    let r = bykov(&scan_args(path.to_str().unwrap(), "1"));
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = parse_csv(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows[0], ["i", "j", "omega", "A", "class", "lyap1", "lyap2", "rotation", "flags"]);

    let c = MapConstants::from_delta_k(3.0, 2.0).unwrap();
    let spec = MapScanSpec {
        rows: Axis::new("omega", 4.0, 7.0, 3).unwrap(),
        cols: Axis::new("A", 0.0, 0.5, 4).unwrap(),
        base: Params::new(0.0, 0.1, 4.0),
        ell: 1,
        seeds_per_cell: 2,
        seed: Some(7),
        settings: ClassifySettings { n: 400, transient: 100, threshold: 5e-4 },
    };
    let grid = orbit::scan(&spec, &c).unwrap();
    assert_eq!(rows.len(), 1 + 12);
    for (row, (i, j, rv, cv, cell)) in rows[1..].iter().zip(grid.iter()) {
        let f = |k: usize| row[k].parse::<f64>().unwrap();
        assert_eq!(row[0], i.to_string());
        assert_eq!(row[1], j.to_string());
        assert!(same(f(2), rv) && same(f(3), cv));
        assert_eq!(row[4], cell.class.map_or("error", |k| k.as_str()));
        assert!(same(f(5), cell.exponents[0]));
        assert!(same(f(6), cell.exponents[1]));
        assert!(same(f(7), cell.rotation));
    }
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = scratch("rerun");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    assert_eq!(bykov(&scan_args(a.to_str().unwrap(), "1")).code, 0);
    assert_eq!(bykov(&scan_args(b.to_str().unwrap(), "3")).code, 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn surfaces_rows_have_small_residuals() {
    let r = bykov(&[
        "surfaces", "--K", "2", "--A", "0:0.5", "--lambda", "0:0.1", "--omega", "0.5:10", "--grid",
        "16,8,32",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = parse_csv(&r.stdout);
    assert_eq!(rows[0], ["label", "A", "lambda", "omega", "branch", "residual"]);
    let labels: std::collections::BTreeSet<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    for l in ["SN1", "SN2", "HOPF", "PD", "NF"] {
        assert!(labels.contains(l), "missing {l}");
    }
    for row in &rows[1..] {
        assert!(row[5].parse::<f64>().unwrap().abs() < 1e-8, "{row:?}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch("config");
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "# point\ndelta=3\nK=1\nA=0.35\nlambda=0.05\nomega=8\n").unwrap();
    let from_file = bykov(&["--config", cfg.to_str().unwrap(), "fixed-points"]);
    assert_eq!(from_file.code, 0, "{}", from_file.stderr);
    let direct = bykov(&["fixed-points", "--A", "0.35", "--lambda", "0.05", "--omega", "8"]);
    assert_eq!(from_file.stdout, direct.stdout);

    let overridden = bykov(&["--config", cfg.to_str().unwrap(), "fixed-points", "--omega", "9"]);
    let v: Value = serde_json::from_str(&overridden.stdout).unwrap();
    assert_eq!(v["params"]["omega"], 9.0);
}

#[test]
fn unknown_config_key_rejected() {
    let dir = scratch("badkey");
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "delta=3\ncolour=blue\n").unwrap();
    let r = bykov(&["--config", cfg.to_str().unwrap(), "constants"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("colour"), "{}", r.stderr);
}
