//! Tabular output as JSON or CSV. Numbers carry 12 significant digits and
//! every document states its unit.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::{CliError, Result};

pub const UNITS: &str = "nats";
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CliError::Usage(format!(
                "unknown output format {other:?} (expected json or csv)"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Rounds to [`SIG_DIGITS`] significant digits.
///
/// ```
/// use alphaleak_cli::table::round_sig;
///
/// assert_eq!(round_sig(0.1234567890123456), 0.123456789012);
/// assert_eq!(round_sig(-2.0), -2.0);
/// ```
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIG_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

/// Text form used in CSV cells.
pub fn render_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        round_sig(v).to_string()
    }
}

fn json_num(v: f64) -> Value {
    serde_json::Number::from_f64(round_sig(v)).map_or(Value::Null, Value::Number)
}

impl Cell {
    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json_num(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(v) => render_num(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// `key: value` lines emitted as CSV comments or top-level JSON fields.
    pub meta: Vec<(String, Value)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("units".into(), json!(UNITS));
        for (k, v) in &self.meta {
            doc.insert(k.clone(), v.clone());
        }
        doc.insert("columns".into(), json!(self.columns));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(Cell::json))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("valid json");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = format!("# units: {UNITS}\n");
        for (k, v) in &self.meta {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(&self.columns).map_err(err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::text)).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }
}

/// Parses CSV emitted by [`Table::to_csv`], skipping `#` comment lines.
/// Numeric cells become [`Cell::Num`], empty cells [`Cell::Empty`].
pub fn parse_csv(text: &str) -> Result<Table> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    let mut table = Table::new(rd.headers().map_err(err)?.iter());
    for rec in rd.records() {
        let rec = rec.map_err(err)?;
        table.push(
            rec.iter()
                .map(|s| match s {
                    "" => Cell::Empty,
                    "inf" => Cell::Num(f64::INFINITY),
                    "-inf" => Cell::Num(f64::NEG_INFINITY),
                    _ => s.parse().map_or_else(|_| Cell::Text(s.into()), Cell::Num),
                })
                .collect(),
        );
    }
    Ok(table)
}
