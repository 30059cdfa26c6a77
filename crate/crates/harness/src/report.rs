//! Reports, CSV tables and their on-disk layout.
//!
//! `report.json` holds the full [`ExperimentReport`]; every table is also
//! written as `<name>.csv` whose header row is exactly the table's column
//! list, always starting with `n,m,t`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TABLE_SCHEMA_VERSION: u32 = 1;
pub const KEY_COLUMNS: [&str; 3] = ["n", "m", "t"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub schema_version: u32,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// A table with columns `n, m, t` followed by `values`.
    pub fn new(name: &str, values: &[&str]) -> Table {
        let columns = KEY_COLUMNS
            .iter()
            .chain(values.iter())
            .map(|s| s.to_string())
            .collect();
        Table {
            name: name.to_string(),
            schema_version: TABLE_SCHEMA_VERSION,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_value(v))).map_err(csv_err)?;
        }
        w.flush().map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Reads a CSV written by [`Table::write_csv`]. The header must match
    /// `columns` exactly; extra or missing columns are errors.
    pub fn read_csv(path: &Path, name: &str, columns: &[String]) -> Result<Table> {
        let csv_err = |source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        if header != columns {
            let unknown: Vec<&String> = header.iter().filter(|h| !columns.contains(h)).collect();
            let missing: Vec<&String> = columns.iter().filter(|c| !header.contains(c)).collect();
            return Err(HarnessError::Schema {
                table: name.to_string(),
                reason: format!(
                    "header {header:?} does not match the schema (unknown {unknown:?}, missing {missing:?})"
                ),
            });
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|e| HarnessError::Schema {
                        table: name.to_string(),
                        reason: format!("value {s:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Table {
            name: name.to_string(),
            schema_version: TABLE_SCHEMA_VERSION,
            columns: columns.to_vec(),
            rows,
        })
    }
}

/// Integers print plainly, everything else in shortest round-trip
/// scientific notation.
pub fn format_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// One checked property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    /// The property being tested, in words.
    pub invariant: String,
    pub passed: bool,
    /// Only gating verdicts decide the exit status.
    pub gating: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, invariant: &str, passed: bool, value: f64, tolerance: f64, detail: String) -> Verdict {
        Verdict {
            name: name.to_string(),
            invariant: invariant.to_string(),
            passed,
            gating: true,
            value: finite_or(value, f64::MAX),
            tolerance,
            detail,
        }
    }

    /// Requires `value <= tolerance`.
    pub fn at_most(name: &str, invariant: &str, value: f64, tolerance: f64) -> Verdict {
        let passed = value <= tolerance;
        Verdict::new(name, invariant, passed, value, tolerance, format!("{value:.3e} <= {tolerance:.3e}"))
    }

    /// Requires `value >= tolerance`.
    pub fn at_least(name: &str, invariant: &str, value: f64, tolerance: f64) -> Verdict {
        let passed = value >= tolerance;
        Verdict::new(name, invariant, passed, value, tolerance, format!("{value:.3e} >= {tolerance:.3e}"))
    }

    pub fn observation(mut self) -> Verdict {
        self.gating = false;
        self
    }

    pub fn with_detail(mut self, detail: String) -> Verdict {
        self.detail = detail;
        self
    }
}

/// Replaces non-finite values, which JSON cannot carry.
pub fn finite_or(v: f64, fallback: f64) -> f64 {
    if v.is_finite() {
        v
    } else if v.is_nan() {
        fallback
    } else {
        v.signum() * f64::MAX
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeInfo {
    pub version: String,
    pub threads: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    /// Fitted slopes and constants.
    pub fits: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
    pub runtime: RuntimeInfo,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: &ExperimentConfig) -> ExperimentReport {
        ExperimentReport {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment: experiment.to_string(),
            config: config.clone(),
            tables: Vec::new(),
            fits: BTreeMap::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
            runtime: RuntimeInfo {
                version: env!("CARGO_PKG_VERSION").to_string(),
                threads: rayon::current_num_threads(),
                elapsed_seconds: 0.0,
            },
        }
    }

    pub fn fit(&mut self, key: impl Into<String>, value: f64) {
        self.fits.insert(key.into(), finite_or(value, f64::MAX));
    }

    /// True when every gating verdict passed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().filter(|v| v.gating).all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<ExperimentReport> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes `report.json` and one CSV per table into `dir`, returning the
    /// paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| HarnessError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut written = Vec::new();
        let json = dir.join("report.json");
        fs::write(&json, self.to_json()?).map_err(io_err(&json))?;
        written.push(json);
        for t in &self.tables {
            let p = dir.join(t.file_name());
            t.write_csv(&p)?;
            written.push(p);
        }
        Ok(written)
    }

    pub fn read(dir: &Path) -> Result<ExperimentReport> {
        let json = dir.join("report.json");
        let text = fs::read_to_string(&json).map_err(|source| HarnessError::Io { path: json, source })?;
        ExperimentReport::from_json(&text)
    }

    /// One line per verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let tag = match (v.passed, v.gating) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "note",
            };
            out.push_str(&format!("{tag} {}: {} ({})\n", v.name, v.detail, v.invariant));
        }
        out
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares slope of `log2 y` against `x`.
pub fn log2_slope(x: &[f64], y: &[f64]) -> f64 {
    let ly: Vec<f64> = y.iter().map(|v| v.log2()).collect();
    linear_fit(x, &ly).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_print_exactly() {
        assert_eq!(format_value(4.0), "4");
        assert_eq!(format_value(-1.0), "-1");
        for v in [0.1, 1.0 / 3.0, 2.5e-300, -7.25e12 + 0.5] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn slopes() {
        let x = [4.0, 5.0, 6.0];
        let y: Vec<f64> = x.iter().map(|n: &f64| 3.0 * 2f64.powf(-n)).collect();
        assert!((log2_slope(&x, &y) + 1.0).abs() < 1e-14);
        let (s, c) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn verdicts() {
        assert!(Verdict::at_most("a", "x", 1.0, 1.0).passed);
        assert!(!Verdict::at_least("a", "x", 0.5, 1.0).passed);
        let v = Verdict::at_least("a", "x", f64::NAN, 1.0);
        assert!(!v.passed && v.value.is_finite());
        assert!(!Verdict::at_most("a", "x", 2.0, 1.0).observation().gating);
    }

    #[test]
    fn observations_do_not_gate() {
        let cfg = ExperimentConfig::defaults(crate::Experiment::Localize);
        let mut r = ExperimentReport::new("localize", &cfg);
        r.verdicts.push(Verdict::at_most("soft", "x", 2.0, 1.0).observation());
        assert!(r.passed());
        assert!(r.summary().starts_with("note soft"));
        r.verdicts.push(Verdict::at_most("hard", "x", 2.0, 1.0));
        assert!(!r.passed());
    }
}
