//! Report rendering. JSON keeps struct field order and rounds every float
//! to 12 significant digits; CSV uses the shortest representation that
//! round-trips.

use std::fmt;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(n: i64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
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

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub table: Table,
    /// The computation succeeded and its verdict is negative.
    pub negative: bool,
}

impl Report {
    pub fn new<T: Serialize>(body: &T, table: Table, negative: bool) -> Result<Self, CliError> {
        let mut json = serde_json::to_value(body).map_err(|e| CliError::compute(e.to_string()))?;
        round_floats(&mut json);
        Ok(Report { json, table, negative })
    }

    pub fn exit_code(&self) -> u8 {
        if self.negative {
            2
        } else {
            0
        }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).map_err(|e| CliError::compute(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| CliError::compute(e.to_string());
                w.write_record(&self.table.header).map_err(io)?;
                for row in &self.table.rows {
                    w.write_record(row.iter().map(Cell::to_string)).map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::compute(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| CliError::compute(e.to_string()))
            }
        }
    }
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        // also folds −0 into 0
        return x + 0.0;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| Number::from_f64(round_sig(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-0.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(round_sig(123456789.123456789), 123456789.123);
        assert_eq!(round_sig(round_sig(std::f64::consts::PI)), round_sig(std::f64::consts::PI));
    }

    #[test]
    fn csv_keeps_full_precision() {
        let mut t = Table::new(&["x", "ok"]);
        t.push(vec![Cell::from(0.1 + 0.2), Cell::from(true)]);
        let r = Report { json: Value::Null, table: t, negative: false };
        assert_eq!(r.render(Format::Csv).unwrap(), "x,ok\n0.30000000000000004,true\n");
    }

    #[test]
    fn json_floats_are_rounded_in_place() {
        #[derive(Serialize)]
        struct S {
            b: f64,
            a: u32,
        }
        let r = Report::new(&S { b: 2.0f64.sqrt(), a: 3 }, Table::default(), false).unwrap();
        assert_eq!(r.render(Format::Json).unwrap(), "{\n  \"b\": 1.41421356237,\n  \"a\": 3\n}\n");
    }
}
