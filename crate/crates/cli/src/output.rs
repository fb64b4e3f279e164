//! CSV and JSON artifacts with a provenance header.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
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

/// Fixed column order, one row per data point.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Provenance written into every artifact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    fn header(&self) -> String {
        format!(
            "# divtherm {}\n# version: {}\n# config_sha256: {}\n# seed: {}\n",
            self.command, self.version, self.config_sha256, self.seed
        )
    }
}

/// Command result: a data table and a JSON report.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub table: Table,
    pub report: Value,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

pub fn render_csv(prov: &Provenance, table: &Table) -> Result<Vec<u8>, CliError> {
    let mut out = prov.header().into_bytes();
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
        let io = |e: csv::Error| CliError::Config(format!("CSV encoding failed: {e}"));
        w.write_record(&table.columns).map_err(io)?;
        for row in &table.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(Path::new("<csv>"), e))?;
    }
    Ok(out)
}

pub fn render_report(prov: &Provenance, report: &Value, table: Option<&Table>) -> Vec<u8> {
    let mut doc = json!({ "provenance": prov, "report": report });
    if let Some(t) = table {
        doc["data"] = serde_json::to_value(t).expect("table serializes");
    }
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

/// Writes `<command>.csv` plus `<command>_report.json`, or a single
/// `<command>.json` holding data and report.
pub fn write_outputs(dir: &Path, format: Format, prov: &Provenance, output: &Output) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let stem = prov.command.as_str();
    match format {
        Format::Csv => {
            let data = dir.join(format!("{stem}.csv"));
            write_file(&data, &render_csv(prov, &output.table)?)?;
            let report = dir.join(format!("{stem}_report.json"));
            write_file(&report, &render_report(prov, &output.report, None))?;
            Ok(vec![data, report])
        }
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            write_file(&path, &render_report(prov, &output.report, Some(&output.table)))?;
            Ok(vec![path])
        }
    }
}

/// Writes an auxiliary JSON document with the provenance block.
pub fn write_json(path: &Path, prov: &Provenance, value: &Value) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    write_file(path, &render_report(prov, value, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let prov = Provenance {
            command: "fit".into(),
            version: "0.1.0".into(),
            config_sha256: "ab".into(),
            seed: 7,
        };
        let mut t = Table::new(&["x", "label"]);
        t.push(vec![1.5e-6.into(), "a".into()]);
        let text = String::from_utf8(render_csv(&prov, &t).unwrap()).unwrap();
        assert_eq!(
            text,
            "# divtherm fit\n# version: 0.1.0\n# config_sha256: ab\n# seed: 7\nx,label\n1.5e-6,a\n"
        );
    }
}
