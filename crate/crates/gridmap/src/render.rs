//! Report model and its three renderings: aligned text table, CSV and JSON.
//!
//! Every fractional number is written with six decimals (ties to even on the
//! exact binary value) in all three formats, so csv and json agree digit for
//! digit. JSON objects have sorted keys.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Number, Value as Json};

pub const TOOL_NAME: &str = "gridmap";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Int(i64),
    Num(f64),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    fn render(&self) -> String {
        match self {
            Value::Text(s) => s.clone(),
            Value::Int(n) => n.to_string(),
            Value::Num(x) => fixed6(*x),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Text(s) => Json::String(s.clone()),
            Value::Int(n) => Json::from(*n),
            Value::Num(x) => number6(*x),
        }
    }

    fn is_numeric(&self) -> bool {
        !matches!(self, Value::Text(_))
    }
}

impl From<u64> for Value {
    fn from(n: u64) -> Self {
        Value::Int(n as i64)
    }
}

impl From<i32> for Value {
    fn from(n: i32) -> Self {
        Value::Int(n.into())
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

/// Six decimals, round-half-even; never prints `-0.000000`.
pub fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn number6(x: f64) -> Json {
    if !x.is_finite() {
        return Json::Null;
    }
    Json::Number(Number::from_str(&fixed6(x)).expect("fixed-point literal is a JSON number"))
}

/// Rewrites every non-integer number in `value` to six decimals. Integers
/// (counts, years) are left as they are.
pub fn normalize_numbers(value: Json) -> Json {
    match value {
        Json::Number(n) if n.is_i64() || n.is_u64() => Json::Number(n),
        Json::Number(n) => number6(n.as_f64().unwrap_or(f64::NAN)),
        Json::Array(items) => Json::Array(items.into_iter().map(normalize_numbers).collect()),
        Json::Object(map) => Json::Object(
            map.into_iter()
                .map(|(k, v)| (k, normalize_numbers(v)))
                .collect(),
        ),
        other => other,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    /// Tool version and input hashes.
    pub provenance: Vec<(String, String)>,
    /// Options that shaped the output.
    pub request: Vec<(String, String)>,
    pub table: Table,
    pub summary: Vec<(String, Value)>,
    /// JSON-only sections (plot data, nested reports).
    pub extra: Vec<(String, Json)>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_table(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("command: {}", self.command)];
        lines.extend(self.provenance.iter().map(|(k, v)| format!("{k}: {v}")));
        lines.extend(self.request.iter().map(|(k, v)| format!("{k}: {v}")));
        lines
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        for line in self.header_lines() {
            let _ = writeln!(out, "# {line}");
        }
        let cells: Vec<Vec<String>> = self
            .table
            .rows
            .iter()
            .map(|r| r.iter().map(Value::render).collect())
            .collect();
        let widths: Vec<usize> = (0..self.table.columns.len())
            .map(|i| {
                cells
                    .iter()
                    .map(|r| r[i].chars().count())
                    .chain([self.table.columns[i].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let numeric: Vec<bool> = (0..self.table.columns.len())
            .map(|i| {
                !self.table.rows.is_empty()
                    && self.table.rows.iter().all(|r| r[i].is_numeric() || r[i] == Value::text(""))
            })
            .collect();
        let line = |fields: &[String]| {
            let mut s = fields
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    if numeric[i] {
                        format!("{f:>w$}", w = widths[i])
                    } else {
                        format!("{f:<w$}", w = widths[i])
                    }
                })
                .collect::<Vec<_>>()
                .join("  ");
            s.truncate(s.trim_end().len());
            s
        };
        let _ = writeln!(out, "{}", line(&self.table.columns));
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        let _ = writeln!(out, "{}", rule.join("  "));
        for row in &cells {
            let _ = writeln!(out, "{}", line(row));
        }
        if !self.summary.is_empty() {
            out.push('\n');
            for (k, v) in &self.summary {
                let _ = writeln!(out, "{k}: {}", v.render());
            }
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for line in self.header_lines() {
            let _ = writeln!(out, "# {line}");
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k}: {}", v.render());
        }
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record(&self.table.columns)
            .expect("in-memory csv write");
        for row in &self.table.rows {
            writer
                .write_record(row.iter().map(Value::render))
                .expect("in-memory csv write");
        }
        let bytes = writer.into_inner().expect("in-memory csv flush");
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        out
    }

    pub fn to_json(&self) -> Json {
        let pairs = |items: &[(String, String)]| {
            Json::Object(
                items
                    .iter()
                    .map(|(k, v)| (k.clone(), Json::String(v.clone())))
                    .collect(),
            )
        };
        let rows = self
            .table
            .rows
            .iter()
            .map(|r| {
                Json::Object(
                    self.table
                        .columns
                        .iter()
                        .cloned()
                        .zip(r.iter().map(Value::to_json))
                        .collect(),
                )
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("command".into(), Json::String(self.command.clone()));
        doc.insert("provenance".into(), pairs(&self.provenance));
        doc.insert("request".into(), pairs(&self.request));
        doc.insert("rows".into(), Json::Array(rows));
        doc.insert(
            "summary".into(),
            Json::Object(
                self.summary
                    .iter()
                    .map(|(k, v)| (k.clone(), v.to_json()))
                    .collect(),
            ),
        );
        for (k, v) in &self.extra {
            doc.insert(k.clone(), normalize_numbers(v.clone()));
        }
        Json::Object(doc)
    }

    fn render_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        out.push('\n');
        out
    }
}
