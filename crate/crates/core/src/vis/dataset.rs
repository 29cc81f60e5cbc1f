//! CSV ingestion with per-column type inference.

use std::cmp::Ordering;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Serialize, Serializer};
use thiserror::Error;

use super::NONE;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset is empty")]
    Empty,
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: u64, expected: u64, found: u64 },
    #[error("duplicate column name \"{0}\"")]
    DuplicateHeader(String),
    #[error("column {0} has an empty name")]
    EmptyHeader(usize),
    #[error("column name \"{0}\" is reserved")]
    ReservedName(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldType {
    Categorical,
    Numerical,
    Temporal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldSchema {
    pub name: String,
    #[serde(rename = "type")]
    pub field_type: FieldType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetSchema {
    pub fields: Vec<FieldSchema>,
    pub rows: usize,
}

impl DatasetSchema {
    pub fn field(&self, name: &str) -> Option<&FieldSchema> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn field_type(&self, name: &str) -> Option<FieldType> {
        self.field(name).map(|f| f.field_type)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.fields.iter().map(|f| f.name.as_str())
    }

    pub fn names_of(&self, t: FieldType) -> impl Iterator<Item = &str> + '_ {
        self.fields
            .iter()
            .filter(move |f| f.field_type == t)
            .map(|f| f.name.as_str())
    }
}

/// Formats tried, in order, when deciding whether a column is temporal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalPatterns {
    pub dates: Vec<String>,
    pub datetimes: Vec<String>,
    /// Also accept RFC 3339 timestamps with an offset.
    pub rfc3339: bool,
}

impl Default for TemporalPatterns {
    fn default() -> Self {
        Self {
            dates: vec!["%Y-%m-%d".into(), "%Y/%m/%d".into(), "%m/%d/%Y".into()],
            datetimes: vec!["%Y-%m-%dT%H:%M:%S".into(), "%Y-%m-%d %H:%M:%S".into()],
            rfc3339: true,
        }
    }
}

impl TemporalPatterns {
    /// Seconds since the epoch, when `s` matches one of the patterns.
    pub fn parse(&self, s: &str) -> Option<i64> {
        for f in &self.dates {
            if let Ok(d) = NaiveDate::parse_from_str(s, f) {
                return Some(d.and_hms_opt(0, 0, 0)?.and_utc().timestamp());
            }
        }
        for f in &self.datetimes {
            if let Ok(d) = NaiveDateTime::parse_from_str(s, f) {
                return Some(d.and_utc().timestamp());
            }
        }
        if self.rfc3339 {
            if let Ok(d) = DateTime::parse_from_rfc3339(s) {
                return Some(d.timestamp());
            }
        }
        None
    }
}

/// A typed cell. Temporal values keep their original text for output.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Missing,
    Number(f64),
    Time { seconds: i64, text: String },
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    /// Ascending order with missing values last. Values of different kinds
    /// never share a column; they compare by kind.
    pub fn cmp_ascending(&self, other: &Value) -> Ordering {
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Number(_) => 0,
                Value::Time { .. } => 1,
                Value::Text(_) => 2,
                Value::Missing => 3,
            }
        }
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Time { seconds: a, .. }, Value::Time { seconds: b, .. }) => a.cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Missing => s.serialize_none(),
            Value::Number(x) => s.serialize_f64(*x),
            Value::Time { text, .. } | Value::Text(text) => s.serialize_str(text),
        }
    }
}

/// Rows of typed values under an inferred schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: DatasetSchema,
    pub rows: Vec<Vec<Value>>,
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn read_raw(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<String>>), DatasetError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DatasetError::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(DatasetError::Empty);
    }
    for (i, h) in headers.iter().enumerate() {
        if h.is_empty() {
            return Err(DatasetError::EmptyHeader(i));
        }
        if h == NONE {
            return Err(DatasetError::ReservedName(h.clone()));
        }
        if headers[..i].contains(h) {
            return Err(DatasetError::DuplicateHeader(h.clone()));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths {
                pos,
                expected_len,
                len,
            } => DatasetError::Ragged {
                line: pos.as_ref().map_or(0, |p| p.line()),
                expected: *expected_len,
                found: *len,
            },
            _ => DatasetError::Csv(e.to_string()),
        })?;
        rows.push(record.iter().map(|v| v.trim().to_owned()).collect());
    }
    Ok((headers, rows))
}

fn infer_column(values: &[&str], patterns: &TemporalPatterns) -> FieldType {
    let present: Vec<&str> = values.iter().copied().filter(|v| !v.is_empty()).collect();
    if present.is_empty() {
        FieldType::Categorical
    } else if present.iter().all(|v| parse_number(v).is_some()) {
        FieldType::Numerical
    } else if present.iter().all(|v| patterns.parse(v).is_some()) {
        FieldType::Temporal
    } else {
        FieldType::Categorical
    }
}

/// Parses CSV bytes and types every column. Empty cells are missing.
pub fn load_dataset_with(bytes: &[u8], patterns: &TemporalPatterns) -> Result<Dataset, DatasetError> {
    let (headers, raw) = read_raw(bytes)?;
    let fields: Vec<FieldSchema> = headers
        .into_iter()
        .enumerate()
        .map(|(c, name)| {
            let column: Vec<&str> = raw.iter().map(|r| r[c].as_str()).collect();
            FieldSchema {
                name,
                field_type: infer_column(&column, patterns),
            }
        })
        .collect();
    let rows = raw
        .iter()
        .map(|r| {
            r.iter()
                .zip(&fields)
                .map(|(v, f)| {
                    if v.is_empty() {
                        return Value::Missing;
                    }
                    match f.field_type {
                        FieldType::Numerical => Value::Number(parse_number(v).expect("column inferred numerical")),
                        FieldType::Temporal => Value::Time {
                            seconds: patterns.parse(v).expect("column inferred temporal"),
                            text: v.clone(),
                        },
                        FieldType::Categorical => Value::Text(v.clone()),
                    }
                })
                .collect()
        })
        .collect::<Vec<Vec<Value>>>();
    Ok(Dataset {
        schema: DatasetSchema {
            fields,
            rows: rows.len(),
        },
        rows,
    })
}

pub fn load_dataset(bytes: &[u8]) -> Result<Dataset, DatasetError> {
    load_dataset_with(bytes, &TemporalPatterns::default())
}

pub fn infer_schema(bytes: &[u8]) -> Result<DatasetSchema, DatasetError> {
    Ok(load_dataset(bytes)?.schema)
}
