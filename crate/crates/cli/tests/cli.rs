use std::path::Path;
use std::process::{Command, Output};

use planar_gravity::enumeration::{tutte_table, CountTable};
use serde_json::Value;

fn pgrav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgrav")).args(args).output().expect("spawn pgrav")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn enumerate_csv_round_trips() {
    let o = pgrav(&["enumerate", "--nmax", "20", "--format", "csv", "--seed", "9"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# pgrav "));
    assert!(text.contains("seed=9"));
    assert!(text.lines().any(|l| l == "3,3,4"));
    let parsed = CountTable::from_csv(&text).unwrap();
    assert_eq!(parsed, tutte_table(20, 22).unwrap());
}

#[test]
fn gf_reports_critical_point() {
    let o = pgrav(&["gf", "--beta", "1", "--order", "50"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["seed"], 1);
    let x1 = v["critical"]["x1"].as_f64().unwrap();
    assert!((x1 - 0.272166).abs() < 1e-6);
    assert_eq!(v["residuals_zero"], true);
    assert_eq!(v["s_coefficients"][6], "24");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let o = pgrav(&[
            "boundary", "--events", "20000", "--replicas", "3", "--seed", "4", "--threads", threads, "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(path).unwrap()
    };
    let a = run("a.json", "1");
    let b = run("b.json", "1");
    let c = run("c.json", "2");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["seed"], 4);
    assert!(v["fits"]["tv_to_stationary"]["value"].as_f64().unwrap() < 0.05);
    let other = pgrav(&["boundary", "--events", "20000", "--replicas", "3", "--seed", "5"]);
    assert_ne!(other.stdout, a);
}

#[test]
fn every_subcommand_runs_small() {
    let cases: [&[&str]; 5] = [
        &["nonlinear", "--replicas", "50"],
        &["trees", "--n", "21", "--replicas", "10"],
        &["internal", "--replicas", "10", "--horizon", "50"],
        &["onedim", "--replicas", "100"],
        &["boundary", "--events", "2000", "--mode", "boundary"],
    ];
    for args in cases {
        for format in ["csv", "json"] {
            let mut a = args.to_vec();
            a.extend(["--format", format]);
            let o = pgrav(&a);
            assert_eq!(code(&o), 0, "{a:?}: {}", String::from_utf8_lossy(&o.stderr));
            assert!(!o.stdout.is_empty());
            if format == "json" {
                let v = json(&o);
                assert!(v["fits"].is_object(), "{a:?}");
                assert_eq!(v["command"], args[0]);
            }
        }
    }
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small table\nnmax = 6\nseed=77\n").unwrap();
    let o = pgrav(&["enumerate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["seed"], 77);
    assert_eq!(v["params"]["nmax"], "6");
    // flags win over the file
    let o = pgrav(&["enumerate", "--config", cfg.to_str().unwrap(), "--nmax", "4"]);
    assert_eq!(json(&o)["params"]["nmax"], "4");
    std::fs::write(&cfg, "nmax=6\nnot_a_key=1\n").unwrap();
    assert_eq!(code(&pgrav(&["enumerate", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn usage_and_cap_exit_codes() {
    assert_eq!(code(&pgrav(&["nosuch"])), 2);
    assert_eq!(code(&pgrav(&["gf", "--order", "many"])), 2);
    assert_eq!(code(&pgrav(&["enumerate", "--format", "xml"])), 2);
    assert_eq!(code(&pgrav(&["nonlinear", "--r1", "0.9", "--r2", "0.5"])), 2);
    assert_eq!(code(&pgrav(&["enumerate", "--nmax", "100000"])), 3);
    assert_eq!(code(&pgrav(&["--help"])), 0);
}

#[test]
fn failed_run_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.json");
    let o = pgrav(&["enumerate", "--nmax", "100000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn reproduce_exit_codes() {
    let o = pgrav(&["reproduce", "--criteria", "1,2,3", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(",PASS,")).count(), 3);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, planar_gravity::acceptance::FROZEN_COUNTS.replace("5,3,24", "5,3,25")).unwrap();
    let o = pgrav(&["reproduce", "--criteria", "1", "--fixture", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let v = json(&o);
    assert_eq!(v["criteria"][0]["id"], "C01");
    assert_eq!(v["criteria"][0]["pass"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL C01"));

    let o = pgrav(&["reproduce", "--criteria", "7"]);
    assert_eq!(code(&o), 4);
    assert_eq!(code(&pgrav(&["reproduce", "--criteria", "16"])), 2);
    assert_eq!(code(&pgrav(&["reproduce", "--level", "slow"])), 2);
}

#[test]
fn output_path_must_be_writable() {
    let o = pgrav(&["enumerate", "--nmax", "4", "--out", "/nonexistent-dir/x.csv"]);
    assert_ne!(code(&o), 0);
    assert!(!Path::new("/nonexistent-dir/x.csv").exists());
}
