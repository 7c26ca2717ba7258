//! CSV tables and the run summary.
//!
//! Tables are assembled in memory and written once, after the Monte Carlo results
//! have been merged in sample order, so file contents never depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Uint(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Uint(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Uint(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Doubles use 17 significant digits, which round-trips every `f64`.
fn format_cell(cell: &Cell, out: &mut String) {
    match cell {
        Cell::Int(v) => write!(out, "{v}").unwrap(),
        Cell::Uint(v) => write!(out, "{v}").unwrap(),
        Cell::Float(v) if v.is_nan() => out.push_str("NaN"),
        Cell::Float(v) if v.is_infinite() => out.push_str(if *v > 0.0 { "inf" } else { "-inf" }),
        Cell::Float(v) => write!(out, "{v:.16e}").unwrap(),
        Cell::Text(s) => out.push_str(s),
        Cell::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Cell::Empty => {}
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(file: &str, header: &[&'static str]) -> Self {
        Self { file: file.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}: row width", self.file);
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                format_cell(cell, &mut out);
            }
            out.push('\n');
        }
        out
    }
}

/// One acceptance check of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Criterion {
    /// Passes when `measured ≤ threshold`.
    pub fn at_most(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: measured <= threshold, measured, threshold, detail: detail.into() }
    }

    /// Passes when `measured ≥ threshold`.
    pub fn at_least(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: measured >= threshold, measured, threshold, detail: detail.into() }
    }
}

/// Everything an experiment produces before it is written to disk.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<CsvTable>,
    pub criteria: Vec<Criterion>,
    pub metrics: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub rmtlab: String,
    pub rmtlab_core: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub experiment: String,
    pub config_hash: String,
    /// Canonical TOML of the configuration that was run.
    pub config: String,
    pub passed: bool,
    pub criteria: Vec<Criterion>,
    /// Non-finite values are written as `null`.
    pub metrics: BTreeMap<String, Option<f64>>,
    pub files: Vec<String>,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub versions: Versions,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Writes every table and `summary.json` into `dir`.
pub fn write_all(dir: &Path, outcome: &Outcome, summary: &RunSummary) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for t in &outcome.tables {
        std::fs::write(dir.join(&t.file), t.render())?;
    }
    std::fs::write(dir.join("summary.json"), summary.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubles_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let mut s = String::new();
            format_cell(&Cell::Float(v), &mut s);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert!(!s.contains(' '));
        }
    }

    #[test]
    fn render_has_header_and_rows() {
        let mut t = CsvTable::new("x.csv", &["N", "seed", "v", "ok", "note"]);
        t.push(vec![3usize.into(), 7u64.into(), 0.5.into(), true.into(), Cell::Empty]);
        assert_eq!(t.render(), "N,seed,v,ok,note\n3,7,5.0000000000000000e-1,true,\n");
    }
}
