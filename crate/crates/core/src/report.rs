//! Serializable experiment reports and their JSON/CSV renderings.
//!
//! Cell types inside a row are restricted to what the published schema
//! (`schema/experiment_report.schema.json`) allows: strings (exact integers
//! are written as decimal strings), JSON numbers, booleans, `null`, and the
//! rational object `{"num", "den", "value"}`. In CSV a rational is printed as
//! `num/den` and `null` as an empty cell.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::combinatorics::{ExactCount, ExactRational};
use crate::error::{Error, Result};
use crate::rational::{self, RationalJson};

/// The JSON schema every report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/experiment_report.schema.json");

pub type Row = Map<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub config: Map<String, Value>,
    pub seed: u64,
    pub rows: Vec<Row>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn new(command: &str, config: Map<String, Value>, seed: u64) -> Self {
        ExperimentReport {
            command: command.to_string(),
            config,
            seed,
            rows: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Appends a row; every row of a report must carry the same columns in
    /// the same order.
    pub fn push(&mut self, row: Row) {
        if let Some(first) = self.rows.first() {
            debug_assert!(
                first.keys().eq(row.keys()),
                "row columns differ from the first row"
            );
        }
        self.rows.push(row);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    /// Zeroes every `runtime_ms` cell so repeated runs are byte-identical.
    pub fn strip_timings(&mut self) {
        for row in &mut self.rows {
            if let Some(v) = row.get_mut("runtime_ms") {
                *v = Value::from(0u64);
            }
        }
    }

    pub fn columns(&self) -> Vec<String> {
        self.rows
            .first()
            .map(|r| r.keys().cloned().collect())
            .unwrap_or_default()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("report: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let columns = self.columns();
        if !columns.is_empty() {
            w.write_record(&columns).expect("in-memory write");
        }
        for row in &self.rows {
            let record: Vec<String> = columns
                .iter()
                .map(|c| row.get(c).map(csv_cell).unwrap_or_default())
                .collect();
            w.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Object(o) => match (o.get("num"), o.get("den")) {
            (Some(Value::String(n)), Some(Value::String(d))) if d == "1" => n.clone(),
            (Some(Value::String(n)), Some(Value::String(d))) => format!("{n}/{d}"),
            _ => v.to_string(),
        },
        other => other.to_string(),
    }
}

/// Reads a rational cell back into an exact value.
pub fn rational_cell(v: &Value) -> Result<ExactRational> {
    let j: RationalJson =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("rational cell: {e}")))?;
    ExactRational::try_from(&j)
}

/// Builds one row; columns keep insertion order.
#[derive(Debug, Default)]
pub struct RowBuilder {
    row: Row,
    started: Option<Instant>,
}

impl RowBuilder {
    pub fn new() -> Self {
        RowBuilder {
            row: Map::new(),
            started: Some(Instant::now()),
        }
    }

    pub fn uint(mut self, key: &str, v: u64) -> Self {
        self.row.insert(key.into(), Value::from(v));
        self
    }

    pub fn count(mut self, key: &str, v: &ExactCount) -> Self {
        self.row.insert(key.into(), Value::String(v.to_string()));
        self
    }

    pub fn opt_count(self, key: &str, v: Option<&ExactCount>) -> Self {
        match v {
            Some(v) => self.count(key, v),
            None => self.null(key),
        }
    }

    pub fn rational(mut self, key: &str, v: &ExactRational) -> Self {
        let j = RationalJson::from(v);
        self.row.insert(key.into(), serde_json::to_value(j).expect("rational serializes"));
        self
    }

    pub fn opt_rational(self, key: &str, v: Option<&ExactRational>) -> Self {
        match v {
            Some(v) => self.rational(key, v),
            None => self.null(key),
        }
    }

    /// Non-finite floats become `null`.
    pub fn float(mut self, key: &str, v: f64) -> Self {
        let value = serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null);
        self.row.insert(key.into(), value);
        self
    }

    pub fn opt_float(self, key: &str, v: Option<f64>) -> Self {
        self.float(key, v.unwrap_or(f64::NAN))
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.row.insert(key.into(), Value::Bool(v));
        self
    }

    pub fn opt_flag(mut self, key: &str, v: Option<bool>) -> Self {
        self.row.insert(key.into(), v.map(Value::Bool).unwrap_or(Value::Null));
        self
    }

    pub fn text(mut self, key: &str, v: impl Into<String>) -> Self {
        self.row.insert(key.into(), Value::String(v.into()));
        self
    }

    pub fn opt_text(self, key: &str, v: Option<String>) -> Self {
        match v {
            Some(s) => self.text(key, s),
            None => self.null(key),
        }
    }

    pub fn null(mut self, key: &str) -> Self {
        self.row.insert(key.into(), Value::Null);
        self
    }

    /// Closes the row with its `runtime_ms` column.
    pub fn finish(mut self) -> Row {
        let ms = self.started.map(|t| t.elapsed().as_millis() as u64).unwrap_or(0);
        self.row.insert("runtime_ms".into(), Value::from(ms));
        self.row
    }
}

/// Helper for echoing parameters into `config`.
pub fn config(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn rational_text(r: &ExactRational) -> Value {
    Value::String(rational::format_rational(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn sample_report() -> ExperimentReport {
        let mut rep = ExperimentReport::new("closed-form", config(&[("formula", "t3".into())]), 7);
        for n in 1..=2u64 {
            let r = ExactRational::new(BigInt::from(3 * n), BigInt::from(2));
            rep.push(
                RowBuilder::new()
                    .uint("n", n)
                    .rational("mean", &r)
                    .float("mean_f64", rational::to_f64(&r))
                    .opt_flag("holds", if n == 1 { Some(true) } else { None })
                    .finish(),
            );
        }
        rep.strip_timings();
        rep
    }

    #[test]
    fn json_round_trip() {
        let rep = sample_report();
        let back = ExperimentReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        let mean = rational_cell(&back.rows[0]["mean"]).unwrap();
        assert_eq!(mean, ExactRational::new(3.into(), 2.into()));
    }

    #[test]
    fn csv_layout() {
        let csv = sample_report().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,mean,mean_f64,holds,runtime_ms");
        assert_eq!(lines[1], "1,3/2,1.5,true,0");
        assert_eq!(lines[2], "2,3,3.0,,0");
    }

    #[test]
    fn nan_becomes_null() {
        let row = RowBuilder::new().float("x", f64::NAN).finish();
        assert_eq!(row["x"], Value::Null);
    }
}
