use std::process::Command;

use dynlend::cli::{run_with_io, EXIT_CONFIG, EXIT_SOLVER};
use dynlend::exo_policy::{uniform_closed_form, ExoModel, ExoParams};
use dynlend::income_dist::IncomeDistribution;
use dynlend::output::{Cell, Table};
use dynlend::value_fn::ViConfig;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with_io(std::iter::once("dynlend").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn lookup(table: &Table, key: &str) -> f64 {
    let row = table
        .rows
        .iter()
        .find(|r| matches!(&r[0], Cell::Text(k) if k == key))
        .unwrap_or_else(|| panic!("no row {key}"));
    match row[1] {
        Cell::Num(v) => v,
        Cell::Int(v) => v as f64,
        Cell::Text(ref s) => panic!("{key} is text: {s}"),
    }
}

#[test]
fn solve_exo_summary_reports_the_threshold() {
    let (code, out, _) = run(&["solve-exo", "--rho", "0.95", "--d", "0.8333", "--dist", "uniform"]);
    assert_eq!(code, 0);
    let t = Table::from_csv(&out).unwrap();
    assert_eq!(t.columns, ["key", "value"]);
    let (rho, d) = (0.95, 0.8333);
    let x_bar = lookup(&t, "x_bar");
    assert!((x_bar - (rho - d) / (2.0 * rho - d - d * rho)).abs() < 1e-10);
    assert!((x_bar - 0.4242).abs() < 1e-3);
}

#[test]
fn value_function_csv_round_trips_bit_exact() {
    let (code, out, _) = run(&["solve-exo", "--grid", "300", "--table", "value-function"]);
    assert_eq!(code, 0);
    assert!(!out.contains('\r'));
    let t = Table::from_csv(&out).unwrap();
    let model = ExoModel::solve(
        &IncomeDistribution::uniform(),
        &ExoParams::new(0.95, 5.0 / 6.0).unwrap(),
        &ViConfig::default().with_grid(300),
    )
    .unwrap();
    assert_eq!(t.rows.len(), model.vf.len());
    for (i, row) in t.rows.iter().enumerate() {
        let nums: Vec<f64> = row.iter().map(|c| if let Cell::Num(v) = c { *v } else { panic!("{c:?}") }).collect();
        assert_eq!(nums[0].to_bits(), model.vf.points()[i].to_bits());
        assert_eq!(nums[1].to_bits(), model.vf.values[i].to_bits());
        assert_eq!(nums[2].to_bits(), model.vf.policy[i].to_bits());
    }
}

#[test]
fn solve_endo_json_has_the_grand_experiment() {
    let (code, out, _) = run(&["solve-endo", "--alpha", "1", "--rho", "0.95", "--dist", "uniform", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let oracle = (1.0 - (1.0f64 - 0.95 * 0.95).sqrt()) / 0.95;
    assert!((v["d_star"].as_f64().unwrap() - oracle).abs() < 1e-12);
    assert!((v["x_bar"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((v["d0"].as_f64().unwrap() - 0.4826).abs() < 1e-4);
    assert_eq!(v["regime"], "constant");
    // keys come out sorted
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn simulate_is_deterministic_under_a_seed() {
    let args = ["simulate", "--paths", "20000", "--seed", "7"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let (_, c, _) = run(&["simulate", "--paths", "20000", "--seed", "8"]);
    assert_ne!(a, c);
    let t = Table::from_csv(&a).unwrap();
    assert!(lookup(&t, "z_score").abs() < 4.0);
}

#[test]
fn tabular_commands_emit_rows() {
    for (args, min_rows) in [
        (vec!["hybrid", "--x0-points", "20"], 20),
        (vec!["hybrid", "--model", "endo", "--table", "inclusiveness", "--x0-points", "10"], 10),
        (vec!["segment", "--d", "0.83"], 41),
        (vec!["sweep-variance", "--alpha", "0.5", "--points", "12"], 12),
        (vec!["two-point", "--points", "11"], 11),
    ] {
        let (code, out, err) = run(&args);
        assert_eq!(code, 0, "{args:?}: {err}");
        let t = Table::from_csv(&out).unwrap();
        assert_eq!(t.rows.len(), min_rows, "{args:?}");
    }
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(&cfg, r#"{"model":{"rho":0.9,"d":0.7},"output":{"format":"json"}}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let (_, out, _) = run(&["--config", cfg, "solve-exo", "--grid", "200"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rho"], 0.9);
    let cf = uniform_closed_form(&ExoParams::new(0.9, 0.7).unwrap()).unwrap();
    assert!((v["x_bar"].as_f64().unwrap() - cf.x_bar).abs() < 1e-10);
    let (_, out, _) = run(&["--config", cfg, "--format", "csv", "solve-exo", "--grid", "200", "--d", "0.6"]);
    let t = Table::from_csv(&out).unwrap();
    assert_eq!(lookup(&t, "d"), 0.6);
    assert_eq!(lookup(&t, "rho"), 0.9);
}

#[test]
fn output_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub").join("s.json");
    let (code, out, _) = run(&["two-point", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 51);
    let (code, _, _) = run(&["segment", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(dir.path().join("segment.csv").exists());
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve-exo", "--rho", "1.2"]).0, EXIT_CONFIG);
    assert_eq!(run(&["solve-exo", "--dist", "beta:1"]).0, EXIT_CONFIG);
    assert_eq!(run(&["no-such-command"]).0, EXIT_CONFIG);
    assert_eq!(run(&["--config", "/nonexistent/cfg.json", "segment"]).0, EXIT_CONFIG);
    assert_eq!(run(&["verify", "--suite", "nope"]).0, EXIT_CONFIG);
    assert_eq!(run(&["solve-exo", "--dist", "two_point:0.5,0.2"]).0, EXIT_SOLVER);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sweep-variance"));
}

#[test]
fn verify_suite_passes() {
    let (code, out, _) = run(&["verify", "--suite", "exo"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 3);
    assert!(!out.contains("FAIL"));
    let (code, out, _) = run(&["verify", "--suite", "all"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn binary_honours_the_output_dir_variable() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_dynlend"))
        .args(["two-point", "--points", "5"])
        .env("DYNLEND_OUTPUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let t = Table::from_csv(&std::fs::read_to_string(dir.path().join("two-point.csv")).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 5);

    let out = Command::new(env!("CARGO_BIN_EXE_dynlend")).args(["solve-endo", "--rho", "7"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
}
