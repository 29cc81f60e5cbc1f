//! Grouping, aggregation and sorting of a dataset under a chart
//! specification.

use std::cmp::Ordering;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use super::chart::ChartSpec;
use super::dataset::{Dataset, FieldType, Value};
use super::{AggregateMethod, SortOrder};

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("unknown field \"{0}\"")]
    UnknownField(String),
    #[error("{method} needs a numerical field, \"{field}\" is {field_type:?}")]
    NonNumeric {
        method: AggregateMethod,
        field: String,
        field_type: FieldType,
    },
}

/// The table a chart draws: one column per mapped channel (aggregated
/// channels are named `method(field)`) plus the group-by field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformedTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl TransformedTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Field(usize),
    /// Aggregation over a field, or a plain row count when the field is absent.
    Aggregate(AggregateMethod, Option<usize>),
}

impl Source {
    fn field(self) -> Option<usize> {
        match self {
            Source::Field(f) | Source::Aggregate(_, Some(f)) => Some(f),
            Source::Aggregate(_, None) => None,
        }
    }
}

/// Reduces the values of one group. Count counts rows, missing values
/// included; the other methods skip missing values. An empty sum is zero;
/// an empty average, minimum or maximum is missing.
pub fn aggregate<'a>(method: AggregateMethod, values: impl IntoIterator<Item = &'a Value>) -> Value {
    let values: Vec<&Value> = values.into_iter().collect();
    if method == AggregateMethod::Count {
        return Value::Number(values.len() as f64);
    }
    let nums: Vec<f64> = values.iter().filter_map(|v| v.as_f64()).collect();
    match method {
        AggregateMethod::Sum => Value::Number(nums.iter().sum()),
        _ if nums.is_empty() => Value::Missing,
        AggregateMethod::Average => Value::Number(nums.iter().sum::<f64>() / nums.len() as f64),
        AggregateMethod::Min => Value::Number(nums.iter().copied().fold(f64::INFINITY, f64::min)),
        AggregateMethod::Max => Value::Number(nums.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        AggregateMethod::Count => unreachable!(),
    }
}

fn directed(order: Option<SortOrder>) -> impl Fn(&Value, &Value) -> Ordering {
    move |a, b| match order {
        Some(SortOrder::Descending) => b.cmp_ascending(a),
        _ => a.cmp_ascending(b),
    }
}

/// Key under which equal values land in the same group.
fn group_key(row: &[Value], key_fields: &[usize]) -> String {
    let mut key = String::new();
    for &f in key_fields {
        match &row[f] {
            Value::Missing => key.push('m'),
            Value::Number(x) => {
                let x = if *x == 0.0 { 0.0 } else { *x };
                key.push_str(&format!("n{:016x}", x.to_bits()));
            }
            Value::Time { seconds, .. } => key.push_str(&format!("t{seconds}")),
            Value::Text(s) => {
                key.push('s');
                key.push_str(&s.len().to_string());
                key.push(':');
                key.push_str(s);
            }
        }
    }
    key
}

/// Applies the grouping, aggregation and sorting that `spec` describes.
///
/// Rows are grouped whenever a channel is aggregated or a group-by field is
/// set; the group key is the group-by field together with every mapped,
/// unaggregated channel, and groups keep the order of their first row.
/// Sorting by a field shown in the table sorts the output by that column;
/// sorting by any other field orders the input rows before grouping. Sorts
/// are stable; ascending puts missing values last.
pub fn apply_transform(data: &Dataset, spec: &ChartSpec) -> Result<TransformedTable, TransformError> {
    let schema = &data.schema;
    let index = |f: &str| schema.index_of(f).ok_or_else(|| TransformError::UnknownField(f.to_owned()));

    let channels = [
        (Some(&spec.x), spec.aggregate.x, false),
        (spec.y.as_ref(), spec.aggregate.y, true),
        (spec.color.as_ref(), None, false),
        (spec.size.as_ref(), spec.aggregate.size, false),
    ];
    let mut columns: Vec<(String, Source)> = Vec::new();
    for (field, method, counts_rows) in channels {
        let column = match (field, method) {
            (Some(f), None) => (f.clone(), Source::Field(index(f)?)),
            (Some(f), Some(m)) => {
                let i = index(f)?;
                let t = schema.fields[i].field_type;
                if m.needs_numbers() && t != FieldType::Numerical {
                    return Err(TransformError::NonNumeric {
                        method: m,
                        field: f.clone(),
                        field_type: t,
                    });
                }
                (format!("{m}({f})"), Source::Aggregate(m, Some(i)))
            }
            (None, Some(AggregateMethod::Count)) if counts_rows => ("count".to_owned(), Source::Aggregate(AggregateMethod::Count, None)),
            _ => continue,
        };
        columns.push(column);
    }
    if let Some(g) = &spec.group_by {
        columns.push((g.clone(), Source::Field(index(g)?)));
    }
    let mut seen = Vec::new();
    columns.retain(|(name, _)| {
        let fresh = !seen.contains(name);
        seen.push(name.clone());
        fresh
    });

    let sort = spec.sort.as_deref().map(index).transpose()?;
    let sort_column = sort.and_then(|s| columns.iter().position(|(_, src)| src.field() == Some(s)));
    let cmp = directed(spec.order);

    let mut rows: Vec<&Vec<Value>> = data.rows.iter().collect();
    if let (Some(s), None) = (sort, sort_column) {
        rows.sort_by(|a, b| cmp(&a[s], &b[s]));
    }

    let grouping = spec.group_by.is_some() || columns.iter().any(|(_, s)| matches!(s, Source::Aggregate(..)));
    let mut out: Vec<Vec<Value>> = if grouping {
        let key_fields: Vec<usize> = columns
            .iter()
            .filter_map(|(_, s)| match s {
                Source::Field(f) => Some(*f),
                Source::Aggregate(..) => None,
            })
            .collect();
        let mut groups: IndexMap<String, Vec<&Vec<Value>>> = IndexMap::new();
        for r in rows {
            groups.entry(group_key(r, &key_fields)).or_default().push(r);
        }
        groups
            .values()
            .map(|members| {
                columns
                    .iter()
                    .map(|(_, src)| match *src {
                        Source::Field(f) => members[0][f].clone(),
                        Source::Aggregate(m, Some(f)) => aggregate(m, members.iter().map(|r| &r[f])),
                        Source::Aggregate(m, None) => aggregate(m, members.iter().map(|_| &Value::Missing)),
                    })
                    .collect()
            })
            .collect()
    } else {
        rows.iter()
            .map(|r| {
                columns
                    .iter()
                    .map(|(_, src)| r[src.field().expect("ungrouped columns are fields")].clone())
                    .collect()
            })
            .collect()
    };
    if let Some(c) = sort_column {
        out.sort_by(|a, b| cmp(&a[c], &b[c]));
    }
    Ok(TransformedTable {
        columns: columns.into_iter().map(|(n, _)| n).collect(),
        rows: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::vis::{load_dataset, Mark};

    fn n(x: f64) -> Value {
        Value::Number(x)
    }

    #[test]
    fn aggregate_definitions() {
        let v = [n(1.0), n(2.0), n(3.0)];
        assert_eq!(aggregate(AggregateMethod::Average, &v), n(2.0));
        assert_eq!(aggregate(AggregateMethod::Sum, &v), n(6.0));
        assert_eq!(aggregate(AggregateMethod::Count, &v), n(3.0));
        assert_eq!(aggregate(AggregateMethod::Min, &v), n(1.0));
        assert_eq!(aggregate(AggregateMethod::Max, &v), n(3.0));
        let w = [Value::Missing, n(4.0)];
        assert_eq!(aggregate(AggregateMethod::Count, &w), n(2.0));
        assert_eq!(aggregate(AggregateMethod::Average, &w), n(4.0));
        let empty = [Value::Missing];
        assert_eq!(aggregate(AggregateMethod::Sum, &empty), n(0.0));
        assert_eq!(aggregate(AggregateMethod::Min, &empty), Value::Missing);
    }

    #[test]
    fn min_per_group() {
        let d = load_dataset(b"g,v\na,2\nb,1\na,5\n").unwrap();
        let mut s = ChartSpec::new(Mark::Bar, "g");
        s.y = Some("v".into());
        s.aggregate.y = Some(AggregateMethod::Min);
        let t = apply_transform(&d, &s).unwrap();
        assert_eq!(t.columns, ["g", "min(v)"]);
        assert_eq!(t.rows, [[Value::Text("a".into()), n(2.0)], [Value::Text("b".into()), n(1.0)]]);
    }

    #[test]
    fn rentals_sum_per_detail() {
        let d = load_dataset(fixtures::RENTALS_CSV.as_bytes()).unwrap();
        let mut s = ChartSpec::new(Mark::Bar, "other details");
        s.y = Some("monthly rental".into());
        s.aggregate.y = Some(AggregateMethod::Sum);
        s.group_by = Some("other details".into());
        let t = apply_transform(&d, &s).unwrap();
        assert_eq!(t.columns, ["other details", "sum(monthly rental)"]);
        let detail = d.schema.index_of("other details").unwrap();
        let rent = d.schema.index_of("monthly rental").unwrap();
        let mut expected: IndexMap<String, f64> = IndexMap::new();
        for r in &d.rows {
            let Value::Text(k) = &r[detail] else { panic!() };
            *expected.entry(k.clone()).or_default() += r[rent].as_f64().unwrap();
        }
        assert_eq!(t.rows.len(), expected.len());
        for (row, (k, v)) in t.rows.iter().zip(&expected) {
            assert_eq!(row[0], Value::Text(k.clone()));
            assert_eq!(row[1], n(*v));
        }
    }

    #[test]
    fn count_without_y() {
        let d = load_dataset(b"g,h\na,x\nb,y\na,\n").unwrap();
        let mut s = ChartSpec::new(Mark::Pie, "g");
        s.color = Some("g".into());
        s.aggregate.y = Some(AggregateMethod::Count);
        let t = apply_transform(&d, &s).unwrap();
        assert_eq!(t.columns, ["g", "count"]);
        assert_eq!(t.rows, [[Value::Text("a".into()), n(2.0)], [Value::Text("b".into()), n(1.0)]]);
    }

    #[test]
    fn sorting() {
        let d = load_dataset(b"k,v,w\na,3,1\nb,,2\nc,1,3\nd,2,4\n").unwrap();
        let mut s = ChartSpec::new(Mark::Bar, "k");
        s.y = Some("v".into());
        s.sort = Some("v".into());
        s.order = Some(SortOrder::Ascending);
        let up = apply_transform(&d, &s).unwrap();
        let keys = |t: &TransformedTable| t.rows.iter().map(|r| r[0].clone()).collect::<Vec<_>>();
        let text = |v: &[&str]| v.iter().map(|s| Value::Text((*s).into())).collect::<Vec<_>>();
        assert_eq!(keys(&up), text(&["c", "d", "a", "b"]));
        s.order = Some(SortOrder::Descending);
        let down = apply_transform(&d, &s).unwrap();
        assert_eq!(keys(&down), text(&["b", "a", "d", "c"]));

        s.sort = Some("w".into());
        let by_hidden = apply_transform(&d, &s).unwrap();
        assert_eq!(by_hidden.columns, ["k", "v"]);
        assert_eq!(keys(&by_hidden), text(&["d", "c", "b", "a"]));
    }

    #[test]
    fn errors() {
        let d = load_dataset(b"k,v\na,1\n").unwrap();
        let mut s = ChartSpec::new(Mark::Bar, "k");
        s.y = Some("k".into());
        s.aggregate.y = Some(AggregateMethod::Sum);
        assert!(matches!(apply_transform(&d, &s), Err(TransformError::NonNumeric { .. })));
        let s = ChartSpec::new(Mark::Bar, "zz");
        assert_eq!(apply_transform(&d, &s), Err(TransformError::UnknownField("zz".into())));
    }

    #[test]
    fn plain_projection_dedupes_columns() {
        let d = load_dataset(b"a,b\n1,x\n2,y\n").unwrap();
        let mut s = ChartSpec::new(Mark::Point, "a");
        s.y = Some("a".into());
        s.color = Some("b".into());
        let t = apply_transform(&d, &s).unwrap();
        assert_eq!(t.columns, ["a", "b"]);
        assert_eq!(t.rows.len(), 2);
    }
}
