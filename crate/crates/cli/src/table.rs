//! Result tables and their CSV / JSON serialisations.
//!
//! CSV output starts with `#`-prefixed `key=value` provenance lines, then a
//! column line and the rows. Floats are written with 17 significant digits,
//! so identical tables serialise to identical bytes.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::Failure;

/// Provenance key holding the elapsed wall-clock time.
pub const WALL_CLOCK_KEY: &str = "wall_clock_s";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_num(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(raw: &str) -> Cell {
        if let Ok(v) = raw.parse::<i64>() {
            return Cell::Int(v);
        }
        let numeric = raw.contains(['e', 'E']) || matches!(raw, "NaN" | "inf" | "-inf");
        match raw.parse::<f64>() {
            Ok(v) if numeric => Cell::Num(v),
            _ => Cell::Text(raw.to_string()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Num(v) if v.is_finite() => {
                Value::Number(format_num(*v).parse::<Number>().expect("finite float renders as a JSON number"))
            }
            Cell::Num(v) => Value::String(format_num(*v)),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
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

/// 17 significant digits in scientific notation.
pub fn format_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    /// Ordered provenance entries.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn check(&self) -> Result<(), Failure> {
        if self.rows.is_empty() {
            return Err(Failure::Numerical("refusing to emit an empty table".into()));
        }
        if let Some(bad) = self.rows.iter().position(|r| r.len() != self.columns.len()) {
            return Err(Failure::Numerical(format!("row {bad} has the wrong number of cells")));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String, Failure> {
        self.check()?;
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_failure)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_failure)?;
        }
        let body = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| Failure::Io(e.to_string()))?);
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Table, Failure> {
        let mut meta = Vec::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix("# ") else { break };
            let rest = rest.trim_end_matches('\n');
            let (k, v) = rest.split_once('=').ok_or_else(|| Failure::Io(format!("bad provenance line '{rest}'")))?;
            meta.push((k.to_string(), v.to_string()));
            body_start += line.len();
        }
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text[body_start..].as_bytes());
        let columns = r.headers().map_err(csv_failure)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_failure)?.iter().map(Cell::parse).collect());
        }
        Ok(Table { meta, columns, rows })
    }

    pub fn to_json(&self) -> Result<String, Failure> {
        self.check()?;
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect();
        let mut doc = Map::new();
        doc.insert("meta".into(), Value::Object(meta));
        doc.insert("columns".into(), Value::Array(self.columns.iter().cloned().map(Value::String).collect()));
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| Failure::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: Format) -> Result<String, Failure> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::Io(e.to_string())
}

/// Writes the table to `destination`, or to standard output when `None`.
pub fn emit(table: &Table, format: Format, destination: Option<&Path>) -> Result<(), Failure> {
    let text = table.render(format)?;
    match destination {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["n", "quantity", "value"]);
        t.meta("tool", "watermelon 0.1.0");
        t.meta(WALL_CLOCK_KEY, "0.25");
        t.push(vec![Cell::from(3usize), Cell::from("h, with comma"), Cell::from(0.1)]);
        t.push(vec![Cell::from(4usize), Cell::from("plain"), Cell::from(-2.5e-300)]);
        t
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_num(0.1), "1.0000000000000001e-1");
        assert_eq!(format_num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let text = t.to_csv().unwrap();
        let back = Table::from_csv(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv().unwrap(), text);
    }

    #[test]
    fn json_shape() {
        let t = sample();
        let v: Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 2);
        assert_eq!(v["columns"][1], "quantity");
        assert_eq!(v["meta"]["tool"], "watermelon 0.1.0");
    }

    #[test]
    fn empty_table_is_an_error() {
        let t = Table::new(&["x"]);
        assert!(t.to_csv().is_err());
        assert!(t.to_json().is_err());
    }
}
