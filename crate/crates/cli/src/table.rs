use std::io::{self, Write};

use serde_json::{Map, Value};

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// A named report table; TSV with a header row, or one JSON object.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_tsv(&self, precision: usize) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| format_cell(c, precision)).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.to_string(), cell_json(c)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::json!({ "table": self.name, "rows": Value::Array(rows) })
    }
}

pub fn format_num(v: f64, precision: usize) -> String {
    if v.is_nan() {
        return "NA".into();
    }
    let s = format!("{v:.precision$}");
    // Avoid printing "-0.0000".
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn format_cell(c: &Cell, precision: usize) -> String {
    match c {
        Cell::Num(v) => format_num(*v, precision),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => escape(s),
        Cell::Bool(b) => b.to_string(),
        Cell::Missing => "NA".into(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
        Cell::Int(v) => Value::from(*v),
        Cell::Text(s) => Value::from(s.as_str()),
        Cell::Bool(b) => Value::from(*b),
        Cell::Missing => Value::Null,
    }
}

/// Escapes tabs, newlines and backslashes so a TSV cell stays on one line.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

pub fn emit_tables(tables: &[Table], format: Format, precision: usize) -> io::Result<()> {
    let mut out = io::stdout().lock();
    for (i, t) in tables.iter().enumerate() {
        match format {
            Format::Tsv => {
                if i > 0 {
                    writeln!(out)?;
                }
                out.write_all(t.to_tsv(precision).as_bytes())?;
            }
            Format::Json => writeln!(out, "{}", t.to_json())?,
        }
    }
    Ok(())
}
