//! Certificates, results and their text / JSON / CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::plot::Plot;

pub const SCHEMA: &str = "fracbarrier-report";
pub const SCHEMA_VERSION: u32 = 1;

/// One checked inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    /// Human-readable statement of what `value` is compared with `threshold`.
    pub relation: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Certificate {
    /// `value ≥ threshold`
    pub fn at_least(name: &str, relation: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, relation, value, threshold, value >= threshold)
    }

    /// `value > threshold`
    pub fn above(name: &str, relation: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, relation, value, threshold, value > threshold)
    }

    /// `value ≤ threshold`
    pub fn at_most(name: &str, relation: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, relation, value, threshold, value <= threshold)
    }

    /// `value < threshold`
    pub fn below(name: &str, relation: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, relation, value, threshold, value < threshold)
    }

    /// `value == threshold`
    pub fn equal(name: &str, relation: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, relation, value, threshold, value == threshold)
    }

    /// A pipeline stage that errored before its inequality could be checked.
    pub fn failed(name: &str, relation: &str) -> Self {
        Self::make(name, relation, f64::NAN, f64::NAN, false)
    }

    fn make(name: &str, relation: &str, value: f64, threshold: f64, pass: bool) -> Self {
        Self { name: name.to_string(), relation: relation.to_string(), value, threshold, pass }
    }
}

/// Numeric columns written to one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(file: &str, columns: &[&str]) -> Self {
        Self { file: file.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub scenario: ScenarioKind,
    pub certificates: Vec<Certificate>,
    pub values: BTreeMap<String, f64>,
    pub traces: BTreeMap<String, Vec<f64>>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub plots: Vec<Plot>,
}

impl ScenarioResult {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            certificates: Vec::new(),
            values: BTreeMap::new(),
            traces: BTreeMap::new(),
            notes: Vec::new(),
            tables: Vec::new(),
            plots: Vec::new(),
        }
    }

    pub fn certify(&mut self, c: Certificate) {
        self.certificates.push(c);
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    pub fn trace(&mut self, key: &str, v: Vec<f64>) {
        self.traces.insert(key.to_string(), v);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn all_pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub schema_version: u32,
    pub scenario: Option<ScenarioKind>,
    pub all_pass: bool,
    pub certificate_count: usize,
    /// `scenario/name` of every failing certificate.
    pub failed: Vec<String>,
    pub config: Option<ScenarioConfig>,
    pub results: Vec<ScenarioResult>,
}

impl Report {
    pub fn new(config: Option<ScenarioConfig>, results: Vec<ScenarioResult>) -> Self {
        let failed: Vec<String> = results
            .iter()
            .flat_map(|r| {
                r.certificates.iter().filter(|c| !c.pass).map(move |c| format!("{}/{}", r.scenario.name(), c.name))
            })
            .collect();
        Self {
            schema: SCHEMA,
            schema_version: SCHEMA_VERSION,
            scenario: config.as_ref().map(|c| c.scenario),
            all_pass: failed.is_empty(),
            certificate_count: results.iter().map(|r| r.certificates.len()).sum(),
            failed,
            config,
            results,
        }
    }

    /// Skeleton with no results.
    pub fn empty() -> Self {
        Self::new(None, Vec::new())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SCHEMA} v{SCHEMA_VERSION}");
        let _ = writeln!(out, "scenario: {}", self.scenario.map_or("none", |k| k.name()));
        let passed = self.certificate_count - self.failed.len();
        let _ = writeln!(
            out,
            "overall: {} ({passed}/{} certificates pass)",
            if self.all_pass { "PASS" } else { "FAIL" },
            self.certificate_count
        );
        for r in &self.results {
            let _ = writeln!(out, "\n[{}]", r.scenario.name());
            for c in &r.certificates {
                let _ = writeln!(
                    out,
                    "  {} {:<34} value {:>13} threshold {:>13}  {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    sci(c.value),
                    sci(c.threshold),
                    c.relation
                );
            }
            if !r.values.is_empty() {
                let _ = writeln!(out, "  values:");
                for (k, v) in &r.values {
                    let _ = writeln!(out, "    {k:<28} {}", full(*v));
                }
            }
            if !r.traces.is_empty() {
                let _ = writeln!(out, "  traces:");
                for (k, v) in &r.traces {
                    let items: Vec<String> = v.iter().map(|x| sci(*x)).collect();
                    let _ = writeln!(out, "    {k:<28} [{}]", items.join(", "));
                }
            }
            for n in &r.notes {
                let _ = writeln!(out, "  note: {n}");
            }
        }
        out
    }

    /// Every failed certificate with its relation, one per line.
    pub fn failures(&self) -> Vec<String> {
        self.results
            .iter()
            .flat_map(|r| {
                r.certificates
                    .iter()
                    .filter(|c| !c.pass)
                    .map(move |c| format!("{}/{}: {}", r.scenario.name(), c.name, c.relation))
            })
            .collect()
    }
}

fn sci(v: f64) -> String {
    if v.is_nan() {
        "n/a".into()
    } else {
        format!("{v:.4e}")
    }
}

fn full(v: f64) -> String {
    if v.is_nan() {
        "n/a".into()
    } else {
        format!("{v:.17e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct WriteError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

pub(crate) fn write_file(path: PathBuf, contents: &[u8]) -> Result<PathBuf, WriteError> {
    fs::write(&path, contents).map_err(|source| WriteError { path: path.clone(), source })?;
    Ok(path)
}

/// Writes the report in `format` under `dir` and returns the files written.
///
/// `Text` gives `report.txt`, `Json` gives `report.json`, `Csv` gives
/// `certificates.csv` plus one file per data table.
pub fn emit_report(report: &Report, format: Format, dir: &Path) -> Result<Vec<PathBuf>, WriteError> {
    fs::create_dir_all(dir).map_err(|source| WriteError { path: dir.to_path_buf(), source })?;
    match format {
        Format::Text => Ok(vec![write_file(dir.join("report.txt"), report.to_text().as_bytes())?]),
        Format::Json => Ok(vec![write_file(dir.join("report.json"), report.to_json().as_bytes())?]),
        Format::Csv => {
            let mut written = vec![write_file(dir.join("certificates.csv"), certificate_csv(report).as_bytes())?];
            for r in &report.results {
                for t in &r.tables {
                    written.push(write_file(dir.join(&t.file), t.to_csv().as_bytes())?);
                }
            }
            Ok(written)
        }
    }
}

fn certificate_csv(report: &Report) -> String {
    let mut out = String::from("scenario,name,value,threshold,pass\n");
    for r in &report.results {
        for c in &r.certificates {
            let _ = writeln!(out, "{},{},{},{},{}", r.scenario.name(), c.name, c.value, c.threshold, c.pass);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = ScenarioResult::new(ScenarioKind::Elliptic);
        r.certify(Certificate::at_most("decay", "|u - γ| - M h ≤ threshold", -0.5, 1e-6));
        r.certify(Certificate::above("slack", "slack > 0", -1.0, 0.0));
        r.value("m", 1.5);
        r.trace("trace", vec![1e-2, 1e-3]);
        let mut t = Table::new("u.csv", &["x", "u"]);
        t.push(vec![0.0, 1.0]);
        t.push(vec![0.1, 0.5]);
        r.tables.push(t);
        Report::new(Some(ScenarioConfig::reference(ScenarioKind::Elliptic)), vec![r])
    }

    #[test]
    fn constructors_compare() {
        assert!(Certificate::at_least("a", "", 1.0, 1.0).pass);
        assert!(!Certificate::above("a", "", 1.0, 1.0).pass);
        assert!(Certificate::at_most("a", "", 1.0, 1.0).pass);
        assert!(!Certificate::failed("a", "").pass);
    }

    #[test]
    fn failures_are_collected() {
        let r = sample();
        assert!(!r.all_pass);
        assert_eq!(r.certificate_count, 2);
        assert_eq!(r.failed, vec!["elliptic/slack".to_string()]);
        assert_eq!(r.failures().len(), 1);
    }

    #[test]
    fn empty_skeleton_is_valid_json() {
        let e = Report::empty();
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["results"].as_array().unwrap().len(), 0);
        assert_eq!(v["all_pass"], true);
        assert!(v["scenario"].is_null());
        assert!(e.to_text().contains("0/0"));
    }

    #[test]
    fn json_certificates_carry_the_schema_fields() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        let c = &v["results"][0]["certificates"][0];
        let mut keys: Vec<&str> = c.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["name", "pass", "relation", "threshold", "value"]);
    }

    #[test]
    fn csv_tables_render() {
        let r = sample();
        assert_eq!(r.results[0].tables[0].to_csv(), "x,u\n0,1\n0.1,0.5\n");
        assert!(certificate_csv(&r).starts_with("scenario,name,value,threshold,pass\nelliptic,decay,-0.5,0.000001,true\n"));
    }

    #[test]
    fn emission_is_byte_stable() {
        let base = std::env::temp_dir().join(format!("fracbarrier-report-{}", std::process::id()));
        let (a, b) = (base.join("a"), base.join("b"));
        for dir in [&a, &b] {
            for f in [Format::Text, Format::Json, Format::Csv] {
                emit_report(&sample(), f, dir).unwrap();
            }
        }
        for name in ["report.txt", "report.json", "certificates.csv", "u.csv"] {
            assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
        }
        let _ = fs::remove_dir_all(&base);
    }

    #[test]
    fn unwritable_directory_is_an_error() {
        let file = std::env::temp_dir().join(format!("fracbarrier-blocker-{}", std::process::id()));
        fs::write(&file, b"x").unwrap();
        assert!(emit_report(&Report::empty(), Format::Json, &file.join("sub")).is_err());
        let _ = fs::remove_file(&file);
    }
}
