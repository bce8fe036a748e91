//! Tabular reports and their CSV / JSON encodings.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which
//! round-trips every finite double. Non-finite values are written as the
//! strings `NaN`, `inf` and `-inf`.

use std::fmt;

use serde_json::{Map, Number, Value as Json};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => f.write_str(&format_float(*v)),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Int(v) => Json::Number((*v).into()),
            Value::Float(v) if v.is_finite() => Json::Number(float_number(*v)),
            Value::Float(v) => Json::String(format_float(*v)),
            Value::Bool(v) => Json::Bool(*v),
            Value::Text(s) => Json::String(s.clone()),
        }
    }
}

/// A finite float as a JSON number carrying its exact decimal text.
pub fn float_number(v: f64) -> Number {
    format_float(v).parse().expect("formatted float is a valid JSON number")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// One table plus scalar summary fields. The CSV form carries the table
/// only; the JSON form carries everything.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Vec<(String, Value)>,
    /// Echo of the experiment configuration (JSON only).
    pub config: Vec<(String, Value)>,
}

impl Report {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Report {
            command: command.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
            config: Vec::new(),
        }
    }

    pub fn with_columns(command: &str, columns: Vec<String>) -> Self {
        Report { command: command.into(), columns, rows: Vec::new(), summary: Vec::new(), config: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.push((key.into(), v.into()));
    }
}

pub fn emit_report(r: &Report, format: Format) -> std::io::Result<Vec<u8>> {
    match format {
        Format::Csv => emit_csv(r),
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&report_json(r)).map_err(std::io::Error::other)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn emit_csv(r: &Report) -> std::io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&r.columns)?;
    for row in &r.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))
}

pub fn report_json(r: &Report) -> Json {
    let mut m = Map::new();
    m.insert("version".into(), Json::String("v1".into()));
    m.insert("command".into(), Json::String(r.command.clone()));
    m.insert("columns".into(), Json::Array(r.columns.iter().map(|c| Json::String(c.clone())).collect()));
    m.insert("rows".into(), Json::Array(r.rows.iter().map(|row| Json::Array(row.iter().map(Value::to_json).collect())).collect()));
    let mut s = Map::new();
    for (k, v) in &r.summary {
        s.insert(k.clone(), v.to_json());
    }
    m.insert("summary".into(), Json::Object(s));
    let mut c = Map::new();
    for (k, v) in &r.config {
        c.insert(k.clone(), v.to_json());
    }
    m.insert("config".into(), Json::Object(c));
    Json::Object(m)
}

/// Parse JSON text and emit it again in the report layout.
pub fn reemit_json(text: &str) -> serde_json::Result<Vec<u8>> {
    let v: Json = serde_json::from_str(text)?;
    let mut out = serde_json::to_vec_pretty(&v)?;
    out.push(b'\n');
    Ok(out)
}
