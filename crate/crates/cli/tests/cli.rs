use std::fs;
use std::process::Command;

use gradgraph::operators::{Sym2, Vec2};
use gradgraph::solutions::SolutionDescriptor;
use gradgraph_cli::{emit, run, run_with_threads, CliError, Format, RunConfig, Scenario};
use serde_json::Value;

fn ma() -> SolutionDescriptor {
    SolutionDescriptor::MaRadialExact { c0: 0.0, c1: 1.0 }
}

#[test]
fn verify_all_on_ma_agrees_everywhere() {
    let rep = run(&RunConfig::new(Scenario::VerifyAll, ma())).unwrap();
    let failed: Vec<_> = rep.failed_checks().map(|c| c.name.clone()).collect();
    assert!(failed.is_empty(), "{failed:?}");
    let d = rep.coefficients.iter().find(|r| r.name == "d").unwrap();
    assert!((d.value - 0.25).abs() < 1e-9);
    assert_eq!(d.oracle, Some(0.25));
    let primary: Vec<_> = rep.flux.iter().filter(|f| f.role == "primary").collect();
    assert_eq!(primary.len(), 3);
    for f in primary {
        assert!((f.d - 0.25).abs() < 1e-10, "{} at {}", f.d, f.radius);
    }
    assert_eq!(rep.ledger.len(), 4);
}

#[test]
fn inadmissible_parameters_are_config_errors() {
    let cfg = RunConfig::new(Scenario::Generate, SolutionDescriptor::MaRadialExact { c0: 0.0, c1: -1.0 });
    match run(&cfg) {
        Err(e @ CliError::ConfigInvalid { .. }) => assert_eq!(e.exit_code(), 2),
        other => panic!("expected ConfigInvalid, got {other:?}"),
    }
}

#[test]
fn quadratic_has_vanishing_lower_terms() {
    let q = SolutionDescriptor::Quadratic {
        tau: 0.0,
        a: Sym2::new(2.0, 0.3, 0.7),
        beta: Vec2::new(0.1, -0.4),
        gamma: 1.5,
    };
    let rep = run(&RunConfig::new(Scenario::Expand, q)).unwrap();
    for name in ["d", "d1", "d2"] {
        let row = rep.coefficients.iter().find(|r| r.name == name).unwrap();
        assert!(row.value.abs() < 1e-10, "{name} = {}", row.value);
    }
}

#[test]
fn csv_values_match_json_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let rep = run(&RunConfig::new(Scenario::VerifyAll, ma())).unwrap();
    emit(&rep, dir.path(), Format::Csv, 1).unwrap();
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let mut r = csv::Reader::from_path(dir.path().join("coefficients.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let coeffs = json["coefficients"].as_array().unwrap();
    assert_eq!(rows.len(), coeffs.len());
    for (row, c) in rows.iter().zip(coeffs) {
        assert_eq!(row[0], *c["name"].as_str().unwrap());
        let v: f64 = row[1].parse().unwrap();
        assert_eq!(v.to_bits(), c["value"].as_f64().unwrap().to_bits());
    }
    let mut r = csv::Reader::from_path(dir.path().join("flux.csv")).unwrap();
    let flux = json["flux"].as_array().unwrap();
    for (row, f) in r.records().map(Result::unwrap).zip(flux) {
        let d: f64 = row[3].parse().unwrap();
        assert_eq!(d.to_bits(), f["d"].as_f64().unwrap().to_bits());
    }
    assert!(dir.path().join("certificates.csv").exists());
    assert!(dir.path().join("timing.json").exists());
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let cfg = RunConfig::new(Scenario::VerifyAll, ma());
    let a = run_with_threads(&cfg, 1).unwrap().to_canonical_json();
    let b = run_with_threads(&cfg, 3).unwrap().to_canonical_json();
    assert_eq!(a, b);
}

#[test]
fn empty_sections_are_omitted() {
    let rep = run(&RunConfig::new(Scenario::Generate, ma())).unwrap();
    let v: Value = serde_json::from_str(&rep.to_canonical_json()).unwrap();
    assert_eq!(v["schema_version"].as_u64(), Some(1));
    for key in ["coefficients", "flux", "ledger"] {
        assert!(v.get(key).is_none(), "{key} present");
    }
    assert!(v.get("checks").is_some());
}

fn binary(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_gradgraph"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(binary(&["--scenario", "expand", "--out", out, "--threads", "2"]), 0);
    assert!(dir.path().join("out/report.json").exists());

    let bad_fit = dir.path().join("perturbed.json");
    fs::write(
        &bad_fit,
        r#"{"schema_version": 1, "scenario": "generate",
            "solution": {"family": "perturbed", "eps": 1e-3,
                         "base": {"family": "ma_radial_exact", "c0": 0.0, "c1": 1.0}}}"#,
    )
    .unwrap();
    assert_eq!(binary(&["--config", bad_fit.to_str().unwrap(), "--out", out]), 1);

    let bad_cfg = dir.path().join("bad.json");
    fs::write(&bad_cfg, r#"{"schema_version": 1, "scenario": "expand", "ladder": {"n_theta": 7}}"#).unwrap();
    assert_eq!(binary(&["--config", bad_cfg.to_str().unwrap(), "--out", out]), 2);
    fs::write(&bad_cfg, r#"{"schema_version": 1, "scenaro": "expand"}"#).unwrap();
    assert_eq!(binary(&["--config", bad_cfg.to_str().unwrap(), "--out", out]), 2);
}
