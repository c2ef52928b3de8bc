//! CSV and JSON emission.
//!
//! CSV files carry `#`-prefixed metadata lines, a header row and one row per
//! record with floats written to 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(k) => json!(k),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Scientific notation with 17 significant digits; zero is written as `0`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn to_csv(&self, header: &Header) -> String {
        let mut out = String::new();
        for (k, v) in header.lines().iter().chain(&self.metadata) {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, header: &Header) -> Value {
        let meta: Map<String, Value> = header
            .lines()
            .into_iter()
            .chain(self.metadata.iter().cloned())
            .map(|(k, v)| (k, Value::String(v)))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        json!({ "metadata": meta, "columns": self.columns, "rows": rows })
    }

    /// Writes `<stem>.csv` or `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str, format: Format, header: &Header) -> Result<PathBuf, CliError> {
        let (path, body) = match format {
            Format::Csv => (dir.join(format!("{stem}.csv")), self.to_csv(header)),
            Format::Json => (
                dir.join(format!("{stem}.json")),
                serde_json::to_string_pretty(&self.to_json(header)).expect("json") + "\n",
            ),
        };
        fs::write(&path, body)?;
        Ok(path)
    }
}

/// Provenance lines shared by every output file.
pub struct Header {
    pub command: &'static str,
    pub config: String,
}

impl Header {
    pub fn new(command: &'static str, cfg: &RunConfig) -> Self {
        Self {
            command,
            config: serde_json::to_string(cfg).expect("config serializes"),
        }
    }

    fn lines(&self) -> Vec<(String, String)> {
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        vec![
            ("tool".into(), format!("melan {VERSION}")),
            ("command".into(), self.command.into()),
            ("config".into(), self.config.clone()),
            ("generated_unix".into(), stamp.to_string()),
        ]
    }
}

/// JSON document with the tool version, the config echo and a payload.
pub fn write_report<T: Serialize>(
    dir: &Path,
    name: &str,
    command: &str,
    cfg: &RunConfig,
    payload: &T,
) -> Result<PathBuf, CliError> {
    let doc = json!({
        "tool": "melan",
        "version": VERSION,
        "command": command,
        "config": cfg,
        "report": payload,
    });
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&doc).expect("json") + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_17_digits() {
        let x = 0.1 + 0.2;
        let s = format_float(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.meta("note", "x");
        t.push(vec![1.5.into(), Cell::Empty, true.into()]);
        let header = Header::new("test", &RunConfig::default());
        let csv = t.to_csv(&header);
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, ["a,b,c", "1.5000000000000000e0,,true"]);
        assert!(csv.lines().any(|l| l == "# note = x"));
        assert!(csv.lines().any(|l| l.starts_with("# tool = melan ")));
    }

    #[test]
    fn json_rows_are_keyed_by_column() {
        let mut t = Table::new(&["x", "n"]);
        t.push(vec![2.0.into(), 3usize.into()]);
        let v = t.to_json(&Header::new("test", &RunConfig::default()));
        assert_eq!(v["rows"][0]["x"], json!(2.0));
        assert_eq!(v["rows"][0]["n"], json!(3));
        assert_eq!(v["metadata"]["command"], json!("test"));
    }
}
