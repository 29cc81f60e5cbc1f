//! The declarative chart specification: emission from a solution,
//! validation of documents, and an independent check of the intrinsic
//! rules.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::{DatasetSchema, FieldType};
use super::{dims, AggregateMethod, Mark, SortOrder, NONE};
use crate::solution::SolutionMatrix;
use crate::space::DesignSpace;

#[derive(Debug, Error, PartialEq)]
pub enum ChartError {
    #[error("not a visualization space: {0}")]
    NotVisSpace(String),
    #[error("dimension \"{dimension}\" has {count} selected elements, expected 1")]
    Selection { dimension: String, count: usize },
    #[error("{channel} names unknown field \"{field}\"")]
    UnknownField { channel: String, field: String },
    #[error("design violates intrinsic rules: {}", .0.join("; "))]
    Infeasible(Vec<String>),
    #[error("malformed chart document: {0}")]
    Json(String),
    #[error("invalid chart document: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// Per-channel aggregation methods; absent means not aggregated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<AggregateMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<AggregateMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<AggregateMethod>,
}

impl Aggregates {
    pub fn is_empty(&self) -> bool {
        self.x.is_none() && self.y.is_none() && self.size.is_none()
    }

    pub fn any(&self) -> bool {
        !self.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub mark: Mark,
    pub x: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_by: Option<String>,
    #[serde(default, skip_serializing_if = "Aggregates::is_empty")]
    pub aggregate: Aggregates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<SortOrder>,
}

impl ChartSpec {
    /// A bare chart of `mark` over `x`.
    pub fn new(mark: Mark, x: impl Into<String>) -> Self {
        Self {
            mark,
            x: x.into(),
            y: None,
            color: None,
            size: None,
            group_by: None,
            aggregate: Aggregates::default(),
            sort: None,
            order: None,
        }
    }

    /// Compact JSON in canonical key order with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("chart spec serializes");
        s.push('\n');
        s
    }

    /// Every (channel, field) pair the spec references.
    pub fn field_refs(&self) -> Vec<(&'static str, &str)> {
        let mut out = vec![("x", self.x.as_str())];
        for (channel, f) in [
            ("y", &self.y),
            ("color", &self.color),
            ("size", &self.size),
            ("group_by", &self.group_by),
            ("sort", &self.sort),
        ] {
            if let Some(f) = f {
                out.push((channel, f.as_str()));
            }
        }
        out
    }
}

fn optional(element: &str) -> Option<String> {
    (element != NONE).then(|| element.to_owned())
}

/// Maps the eleven selected elements of `x` to a chart specification and
/// checks it against the intrinsic rules.
pub fn emit_chart_spec(
    space: &DesignSpace,
    x: &SolutionMatrix,
    schema: &DatasetSchema,
) -> Result<ChartSpec, ChartError> {
    let names: Vec<&str> = space.dimensions().iter().map(|d| d.name()).collect();
    if names != dims::ALL {
        return Err(ChartError::NotVisSpace(format!("dimensions are [{}]", names.join(", "))));
    }
    if x.shape() != space.padded_shape() {
        return Err(ChartError::NotVisSpace("solution shape does not match the space".into()));
    }
    let mut picked: Vec<&str> = Vec::with_capacity(dims::ALL.len());
    for (i, d) in space.dimensions().iter().enumerate() {
        let chosen: Vec<usize> = (0..d.len()).filter(|&j| x.get(i, j) == 1).collect();
        if chosen.len() != 1 {
            return Err(ChartError::Selection {
                dimension: d.name().to_owned(),
                count: chosen.len(),
            });
        }
        picked.push(d.element(chosen[0]).expect("index within dimension"));
    }
    let bad = |what: &str, v: &str| ChartError::NotVisSpace(format!("unexpected {what} \"{v}\""));
    let method = |v: &str| -> Result<Option<AggregateMethod>, ChartError> {
        if v == NONE {
            Ok(None)
        } else {
            AggregateMethod::parse(v).map(Some).ok_or_else(|| bad("aggregation", v))
        }
    };
    let spec = ChartSpec {
        mark: Mark::parse(picked[0]).ok_or_else(|| bad("mark", picked[0]))?,
        x: picked[1].to_owned(),
        y: optional(picked[2]),
        color: optional(picked[3]),
        size: optional(picked[4]),
        group_by: optional(picked[5]),
        aggregate: Aggregates {
            x: method(picked[6])?,
            y: method(picked[7])?,
            size: method(picked[8])?,
        },
        sort: optional(picked[9]),
        order: match picked[10] {
            NONE => None,
            v => Some(SortOrder::parse(v).ok_or_else(|| bad("order", v))?),
        },
    };
    for (channel, field) in spec.field_refs() {
        if schema.field(field).is_none() {
            return Err(ChartError::UnknownField {
                channel: channel.to_owned(),
                field: field.to_owned(),
            });
        }
    }
    let violations = check_r0(&spec, schema);
    if violations.is_empty() {
        Ok(spec)
    } else {
        Err(ChartError::Infeasible(violations))
    }
}

/// Parses a chart document and checks its structure against `schema`:
/// referenced fields exist, the group-by field is categorical, order is
/// present exactly when sort is, and aggregations sit on mapped channels
/// (or on an unmapped y).
pub fn validate_chart_spec(json: &str, schema: &DatasetSchema) -> Result<ChartSpec, ChartError> {
    let spec: ChartSpec = serde_json::from_str(json).map_err(|e| ChartError::Json(e.to_string()))?;
    let mut problems = Vec::new();
    for (channel, field) in spec.field_refs() {
        if schema.field(field).is_none() {
            problems.push(format!("{channel} names unknown field \"{field}\""));
        }
    }
    if let Some(g) = &spec.group_by {
        if schema.field_type(g).is_some_and(|t| t != FieldType::Categorical) {
            problems.push(format!("group_by field \"{g}\" is not categorical"));
        }
    }
    if spec.sort.is_some() != spec.order.is_some() {
        problems.push("order must be present exactly when sort is".into());
    }
    if spec.aggregate.size.is_some() && spec.size.is_none() {
        problems.push("size is aggregated but unmapped".into());
    }
    if problems.is_empty() {
        Ok(spec)
    } else {
        Err(ChartError::Invalid(problems))
    }
}

/// Checks `spec` against the intrinsic rules directly on the chart fields,
/// independently of the constraint encoding. Returns one message per
/// violated rule instance.
pub fn check_r0(spec: &ChartSpec, schema: &DatasetSchema) -> Vec<String> {
    let mut out = Vec::new();
    let ty = |f: &str| schema.field_type(f);
    let numeric = |f: &str| ty(f) == Some(FieldType::Numerical);

    for (channel, field) in spec.field_refs() {
        if ty(field).is_none() {
            out.push(format!("{channel} names unknown field \"{field}\""));
        }
    }
    if spec.sort.is_some() != spec.order.is_some() {
        out.push("order is set exactly when sort is".into());
    }
    if spec.size.is_none() && spec.aggregate.size.is_some() {
        out.push("aggregated size needs a field on size".into());
    }
    if spec.y.is_none() && spec.aggregate.y.is_some_and(AggregateMethod::needs_numbers) {
        out.push("only count may aggregate an unmapped y".into());
    }
    if spec.group_by.is_none()
        && spec.aggregate.any()
        && ty(&spec.x) != Some(FieldType::Categorical)
        && spec.y.is_some()
    {
        out.push("aggregation without group_by needs a categorical x or an unmapped y".into());
    }
    if spec.mark == Mark::Pie {
        if spec.color.is_none() {
            out.push("pie needs a field on color".into());
        }
        if spec.y.is_none() && spec.aggregate.y != Some(AggregateMethod::Count) {
            out.push("pie with unmapped y needs a count".into());
        }
    }
    if let Some(s) = &spec.size {
        if !numeric(s) {
            out.push(format!("size field \"{s}\" is not numerical"));
        }
    }
    for (channel, field, method) in [
        ("x", Some(&spec.x), spec.aggregate.x),
        ("y", spec.y.as_ref(), spec.aggregate.y),
    ] {
        if let (Some(f), Some(m)) = (field, method) {
            if m.needs_numbers() && !numeric(f) {
                out.push(format!("{m} on {channel} needs a numerical field, \"{f}\" is not"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{check_feasible, compile};
    use crate::space::ElementRef;
    use crate::vis::{build_vis_space, infer_schema, intrinsic_rules};

    fn schema() -> DatasetSchema {
        infer_schema(b"cat,num,day\na,1,2020-01-01\n").unwrap()
    }

    #[test]
    fn json_shape() {
        let mut s = ChartSpec::new(Mark::Point, "weight");
        s.y = Some("mpg".into());
        assert_eq!(s.to_json(), "{\"mark\":\"point\",\"x\":\"weight\",\"y\":\"mpg\"}\n");
        s.aggregate.y = Some(AggregateMethod::Sum);
        s.sort = Some("mpg".into());
        s.order = Some(SortOrder::Descending);
        s.group_by = Some("g".into());
        assert_eq!(
            s.to_json(),
            "{\"mark\":\"point\",\"x\":\"weight\",\"y\":\"mpg\",\"group_by\":\"g\",\"aggregate\":{\"y\":\"sum\"},\"sort\":\"mpg\",\"order\":\"descending\"}\n"
        );
        let back: ChartSpec = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn validation() {
        let sc = schema();
        assert!(validate_chart_spec(r#"{"mark":"bar","x":"cat"}"#, &sc).is_ok());
        assert!(matches!(validate_chart_spec(r#"{"mark":"bar"}"#, &sc), Err(ChartError::Json(_))));
        assert!(matches!(validate_chart_spec(r#"{"mark":"area","x":"cat"}"#, &sc), Err(ChartError::Json(_))));
        assert!(matches!(validate_chart_spec(r#"{"mark":"bar","x":"cat","z":1}"#, &sc), Err(ChartError::Json(_))));
        let e = validate_chart_spec(r#"{"mark":"bar","x":"zz","group_by":"num","sort":"cat"}"#, &sc).unwrap_err();
        match e {
            ChartError::Invalid(p) => assert_eq!(p.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn r0_messages() {
        let sc = schema();
        let mut s = ChartSpec::new(Mark::Pie, "num");
        let v = check_r0(&s, &sc);
        assert_eq!(v.len(), 2, "{v:?}");
        s.color = Some("cat".into());
        s.aggregate.y = Some(AggregateMethod::Count);
        assert!(check_r0(&s, &sc).is_empty());
        s.aggregate.y = Some(AggregateMethod::Sum);
        assert!(!check_r0(&s, &sc).is_empty());
        let mut t = ChartSpec::new(Mark::Bar, "cat");
        t.y = Some("day".into());
        t.aggregate.y = Some(AggregateMethod::Average);
        assert_eq!(check_r0(&t, &sc).len(), 1);
        t.size = Some("cat".into());
        assert_eq!(check_r0(&t, &sc).len(), 2);
    }

    /// Every feasible design of a small space yields a spec, and that spec
    /// passes both the structural validation and the direct rule check;
    /// every infeasible one is rejected by the direct check.
    #[test]
    fn feasibility_closure_by_enumeration() {
        let sc = infer_schema(b"c,n\na,1\n").unwrap();
        let space = build_vis_space(&sc);
        let set = compile(&space, &intrinsic_rules(&space, &sc)).unwrap();
        let lens = space.row_lengths();
        let mut digits = vec![0usize; lens.len()];
        let (mut feasible, mut total) = (0u128, 0u128);
        'outer: loop {
            let refs: Vec<ElementRef> = digits.iter().enumerate().map(|(i, &j)| ElementRef::new(i, j)).collect();
            let x = SolutionMatrix::from_refs(&space, &refs).unwrap();
            total += 1;
            let emitted = emit_chart_spec(&space, &x, &sc);
            if check_feasible(&set, &x).feasible {
                feasible += 1;
                let spec = emitted.unwrap();
                assert!(validate_chart_spec(&spec.to_json(), &sc).is_ok());
            } else {
                assert!(matches!(emitted, Err(ChartError::Infeasible(_))), "{refs:?}");
            }
            let mut i = lens.len();
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < lens[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
        assert_eq!(total, space.selection_count());
        assert!(feasible > 0 && feasible < total);
    }

    #[test]
    fn selection_errors() {
        let sc = schema();
        let space = build_vis_space(&sc);
        let x = SolutionMatrix::zeros(&space);
        assert!(matches!(emit_chart_spec(&space, &x, &sc), Err(ChartError::Selection { count: 0, .. })));
        let other = crate::fixtures::open_peeps_space();
        let y = SolutionMatrix::zeros(&other);
        assert!(matches!(emit_chart_spec(&other, &y, &sc), Err(ChartError::NotVisSpace(_))));
    }
}
