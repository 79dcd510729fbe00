//! Check and sweep reports, and a small table writer for CSV / JSON lines.

use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Outcome of comparing `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckReport<T> {
    pub lhs: T,
    pub rhs: T,
    /// `rhs - lhs`.
    pub slack: T,
    pub constant_used: T,
    pub passed: bool,
}

impl<T: Real> CheckReport<T> {
    /// Passes when `slack >= -1e-12 max(1, |rhs|)`.
    pub fn new(lhs: T, rhs: T, constant_used: T) -> Self {
        let slack = rhs - lhs;
        let tol = lit::<T>(1e-12) * rhs.abs().max(T::one());
        Self {
            lhs,
            rhs,
            slack,
            constant_used,
            passed: slack >= -tol,
        }
    }

    /// Slack divided by `max(1, |rhs|)`.
    pub fn relative_slack(&self) -> T {
        self.slack / self.rhs.abs().max(T::one())
    }
}

/// Summary of a sampled sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub sweep: String,
    pub n: u64,
    pub seed: u64,
    /// Largest observed value of the checked quantity (a sweep passes when it
    /// stays at or below `tolerance`).
    pub max_violation: f64,
    pub argmax_point: Vec<(String, f64)>,
    pub violations: u64,
    pub tolerance: f64,
    /// Sweep-specific diagnostics.
    pub extra: Vec<(String, f64)>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extra.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn argmax_string(&self) -> String {
        self.argmax_point
            .iter()
            .map(|(k, v)| format!("{k}={}", fmt_real(*v)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Formats with 17 significant digits; `inf`, `-inf` and `nan` spelled out.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_generic<T: Real>(x: T) -> String {
    fmt_real(to_f64(x))
}

/// Output format of a [`Table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

/// A cell of a [`Table`].
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(x) => fmt_real(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(x) if x.is_finite() => {
                let rounded: f64 = fmt_real(*x).parse().expect("formatted float parses");
                serde_json::Number::from_f64(rounded)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            }
            Cell::Real(x) => Value::String(fmt_real(*x)),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Rows under a fixed header, preceded by `key: value` metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Internal(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Jsonl => Ok(self.to_jsonl()),
        }
    }

    /// Metadata as `# key: value` lines, then a header row and the records.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Internal(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Internal(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))?);
        Ok(out)
    }

    /// One `{"meta": {...}}` line, then one object per row.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let meta: Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let mut head = Map::new();
        head.insert("meta".into(), Value::Object(meta));
        out.push_str(&Value::Object(head).to_string());
        out.push('\n');
        for row in &self.rows {
            let obj: Map<String, Value> = self
                .columns
                .iter()
                .cloned()
                .zip(row.iter().map(Cell::json))
                .collect();
            out.push_str(&Value::Object(obj).to_string());
            out.push('\n');
        }
        out
    }
}
