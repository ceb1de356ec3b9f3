//! Tabular reports with fixed float formatting, written as CSV or JSON.

use std::io::Write;

use serde_json::{json, Map, Value};

/// Significant digits used for every float in a report.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    /// The infinite sentinel, written as `inf`.
    Inf,
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Real(x) => fmt_real(*x),
            Cell::Inf => "inf".into(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(n) => json!(n),
            Cell::Real(x) if x.is_finite() => {
                let rounded: f64 = fmt_real(*x).parse().expect("formatted float parses");
                json!(rounded)
            }
            Cell::Real(x) if x.is_nan() => json!("nan"),
            Cell::Real(x) if *x < 0.0 => json!("-inf"),
            Cell::Real(_) | Cell::Inf => json!("inf"),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

/// Formats `x` with [`SIG_DIGITS`] significant digits, trailing zeros
/// trimmed; scientific notation outside `[1e-5, 1e15)`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mant));
    }
    let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    let plain = format!("{:.*}", decimals, x);
    trim_zeros(&plain).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: String,
    /// Effective configuration, written ahead of the data.
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Report {
    pub fn new(kind: &str, config: Vec<(String, String)>, columns: &[&str]) -> Self {
        Self {
            kind: kind.into(),
            config,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn push_summary(&mut self, key: &str, value: Cell) {
        self.summary.push((key.into(), value));
    }

    /// CSV with `#`-prefixed preamble lines carrying the report kind,
    /// configuration and summary, then the header and data rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# report={}", self.kind)?;
        for (k, v) in &self.config {
            writeln!(out, "# config.{k}={v}")?;
        }
        for (k, v) in &self.summary {
            writeln!(out, "# summary.{k}={}", v.render())?;
        }
        let mut w = csv::WriterBuilder::new().delimiter(b',').from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }

    pub fn to_json(&self) -> Value {
        let config: Map<String, Value> = self.config.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> =
                    self.columns.iter().zip(r).map(|(c, v)| (c.clone(), v.to_json())).collect();
                Value::Object(m)
            })
            .collect();
        json!({
            "report": self.kind,
            "config": config,
            "columns": self.columns,
            "rows": rows,
            "summary": summary,
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        writeln!(out)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    pub fn to_json_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }
}
