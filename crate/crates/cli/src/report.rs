//! Report types and their canonical serializations.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use gradgraph::harmonics::RingSamples;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffRow {
    pub name: String,
    pub value: f64,
    pub error: f64,
    pub oracle: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxRow {
    pub formula: String,
    /// `primary` decides pass/fail; `variant` rows are reported only.
    pub role: String,
    pub radius: f64,
    pub d: f64,
    pub refinement_change: f64,
}

/// A named pass/fail entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub invariant: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub id: String,
    pub issue: String,
    pub resolution: String,
    pub evidence: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionInfo {
    pub family: String,
    pub equation: String,
    pub r_min: f64,
    pub r_max: Option<f64>,
    /// Ladder after clamping to the solution domain.
    pub ladder: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionInfo>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<CoeffRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flux: Vec<FluxRow>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub certificates: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ledger: Vec<LedgerEntry>,
    pub checks: Vec<Check>,
    pub summary: Summary,
    /// Dumped as `rings_<name>.csv`.
    #[serde(skip)]
    pub rings: Vec<(String, RingSamples)>,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report {
            schema_version: config.schema_version,
            config,
            solution: None,
            coefficients: Vec::new(),
            flux: Vec::new(),
            certificates: BTreeMap::new(),
            ledger: Vec::new(),
            checks: Vec::new(),
            summary: Summary {
                passed: 0,
                failed: 0,
                all_pass: true,
            },
            rings: Vec::new(),
            wall_clock: Duration::ZERO,
        }
    }

    /// Records `value ≤ threshold` (a NaN value fails).
    pub fn check_le(&mut self, name: &str, invariant: &str, value: f64, threshold: f64) -> bool {
        self.push_check(name, invariant, value, threshold, value <= threshold)
    }

    pub fn push_check(&mut self, name: &str, invariant: &str, value: f64, threshold: f64, pass: bool) -> bool {
        self.checks.push(Check {
            name: name.into(),
            invariant: invariant.into(),
            value,
            threshold,
            pass,
        });
        pass
    }

    pub fn certify<T: Serialize>(&mut self, name: &str, v: &T) {
        let v = serde_json::to_value(v).expect("report values serialize");
        self.certificates.insert(name.into(), v);
    }

    pub fn finish(&mut self) {
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        self.summary = Summary {
            passed: self.checks.len() - failed,
            failed,
            all_pass: failed == 0,
        };
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_canonical_json(&self) -> String {
        canonical_json(&serde_json::to_value(self).expect("report serializes"))
    }
}

/// Float text used by every artifact: 17 significant digits, round-trips.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// Pretty JSON with sorted keys and floats in [`fmt_f64`] form.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat("  ").take(d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(depth + 1, out);
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for (i, k) in keys.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&m[*k], depth + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::IoFailure {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// Writes `report.json` and `timing.json`; with [`Format::Csv`] also the
/// tables and ring dumps. Returns the written paths.
pub fn emit(report: &Report, dir: &Path, format: Format, threads: usize) -> Result<Vec<std::path::PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::IoFailure {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<(), CliError> {
        let p = dir.join(name);
        write_file(&p, &bytes)?;
        written.push(p);
        Ok(())
    };
    put("report.json", report.to_canonical_json().into_bytes())?;
    let timing = serde_json::json!({
        "wall_clock_seconds": report.wall_clock.as_secs_f64(),
        "threads": threads,
    });
    put("timing.json", canonical_json(&timing).into_bytes())?;
    if format == Format::Csv {
        let coeffs = report
            .coefficients
            .iter()
            .map(|c| vec![c.name.clone(), fmt_f64(c.value), fmt_f64(c.error), opt(c.oracle), opt_bool(c.pass)])
            .collect();
        put("coefficients.csv", csv_bytes(&["coefficient", "value", "error", "oracle", "pass"], coeffs))?;
        let flux = report
            .flux
            .iter()
            .map(|f| vec![f.formula.clone(), f.role.clone(), fmt_f64(f.radius), fmt_f64(f.d), fmt_f64(f.refinement_change)])
            .collect();
        put("flux.csv", csv_bytes(&["formula", "role", "radius", "d", "refinement_change"], flux))?;
        let checks = report
            .checks
            .iter()
            .map(|c| vec![c.name.clone(), c.invariant.clone(), fmt_f64(c.value), fmt_f64(c.threshold), c.pass.to_string()])
            .collect();
        put("certificates.csv", csv_bytes(&["check", "invariant", "value", "threshold", "pass"], checks))?;
        for (name, rings) in &report.rings {
            let mut buf = Vec::new();
            rings.write_csv(&mut buf).expect("in-memory csv");
            put(&format!("rings_{name}.csv"), buf)?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let v = json!({"b": 0.1, "a": [1, 2.5], "c": {"z": null, "y": true}});
        let s = canonical_json(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("2.5000000000000000e0"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn float_text_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0, -0.0] {
            let back: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(f64::NAN), "null");
    }
}
