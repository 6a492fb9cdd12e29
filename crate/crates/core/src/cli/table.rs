//! Numeric tables with metadata, written as CSV or JSON.
//!
//! CSV layout: `# key=value` metadata lines, a header row, then rows with
//! every value in `{:.16e}` form (17 significant digits, enough to read
//! back the identical `f64`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::OutputFormat;
use super::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputTable {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl OutputTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("tables always serialize");
                s.push('\n');
                s
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}").unwrap();
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut table = OutputTable::default();
        let mut header = false;
        for line in text.lines() {
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta
                    .split_once('=')
                    .ok_or_else(|| CliError::Usage(format!("bad metadata line '{line}'")))?;
                table.meta.insert(k.to_string(), v.to_string());
            } else if !header {
                table.columns = if line.is_empty() {
                    Vec::new()
                } else {
                    line.split(',').map(String::from).collect()
                };
                header = true;
            } else {
                let row = line
                    .split(',')
                    .map(|c| c.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Usage(format!("bad number in '{line}': {e}")))?;
                if row.len() != table.columns.len() {
                    return Err(CliError::Usage(format!("row width mismatch in '{line}'")));
                }
                table.rows.push(row);
            }
        }
        Ok(table)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad table JSON: {e}")))
    }

    pub fn parse(text: &str, format: OutputFormat) -> Result<Self, CliError> {
        match format {
            OutputFormat::Csv => Self::from_csv(text),
            OutputFormat::Json => Self::from_json(text),
        }
    }
}

/// Write to `path`, or to stdout when `path` is `None`.
pub fn write_table(table: &OutputTable, format: OutputFormat, path: Option<&Path>) -> Result<(), CliError> {
    let text = table.render(format);
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OutputTable {
        let mut t = OutputTable::new(&["n", "E"]);
        t.meta.insert("command".into(), "spectrum".into());
        t.push(vec![0.0, 0.1 + 0.2]);
        t.push(vec![-3.0, 1.0 / 3.0]);
        t.push(vec![7.0, 5e-324]);
        t
    }

    #[test]
    fn csv_and_json_round_trip_bit_exactly() {
        let t = sample();
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let back = OutputTable::parse(&t.render(format), format).unwrap();
            assert_eq!(back.meta, t.meta);
            assert_eq!(back.columns, t.columns);
            for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn empty_table_has_header_and_metadata() {
        let mut t = OutputTable::new(&["phi", "x"]);
        t.meta.insert("k".into(), "v".into());
        assert_eq!(t.to_csv(), "# k=v\nphi,x\n");
        assert_eq!(OutputTable::from_csv(&t.to_csv()).unwrap(), t);
        assert_eq!(OutputTable::from_json(&t.render(OutputFormat::Json)).unwrap(), t);
    }

    #[test]
    fn seventeen_significant_digits() {
        let t = sample();
        let csv = t.to_csv();
        assert!(csv.contains("3.0000000000000004e-1"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = write_table(&sample(), OutputFormat::Csv, Some(&blocker.join("out.csv"))).unwrap_err();
        assert_eq!(err.exit_code(), 6);
    }
}
