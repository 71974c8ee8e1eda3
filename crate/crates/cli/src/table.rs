//! Columnar results and their CSV/JSON encodings.
//!
//! Floats are written in shortest round-trip form in both encodings, so a
//! value read back from either parses to the same `f64`. Non-finite floats
//! become the strings `NaN`, `inf` and `-inf` in JSON; missing cells are
//! empty in CSV and `null` in JSON.

use std::io::Write;

use serde_json::{Map, Number, Value as Json};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Int(i) => Json::from(*i),
            Cell::Float(x) => Number::from_f64(*x)
                .map(Json::Number)
                .unwrap_or_else(|| Json::String(format_float(*x))),
            Cell::Text(s) => Json::String(s.clone()),
            Cell::Missing => Json::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.metadata.push((key.into(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn metadata_value(&self, key: &str) -> Option<&Cell> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Header, rows, then one `# key=value` line per metadata entry.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv_text))?;
        }
        let mut out = writer
            .into_inner()
            .map_err(|e| CliError::Encode(e.to_string()))?;
        for (key, value) in &self.metadata {
            writeln!(out, "# {key}={}", value.csv_text())
                .map_err(|e| CliError::Encode(e.to_string()))?;
        }
        Ok(())
    }

    pub fn to_json(&self, config: &[(&'static str, String)]) -> Json {
        let config: Map<String, Json> = config
            .iter()
            .map(|(k, v)| (k.to_string(), Json::String(v.clone())))
            .collect();
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                Json::Object(
                    self.columns
                        .iter()
                        .zip(row)
                        .map(|(c, cell)| (c.to_string(), cell.json()))
                        .collect(),
                )
            })
            .collect();
        let metadata: Map<String, Json> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), v.json()))
            .collect();
        serde_json::json!({ "config": config, "rows": rows, "metadata": metadata })
    }

    pub fn write_json<W: Write>(
        &self,
        config: &[(&'static str, String)],
        mut out: W,
    ) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut out, &self.to_json(config))?;
        writeln!(out).map_err(|e| CliError::Encode(e.to_string()))
    }
}
