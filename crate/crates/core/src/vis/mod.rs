//! Visualization domain: a design space built from a dataset, the hard
//! rules that keep every design renderable, a grouping and aggregation
//! engine, and a declarative chart specification.

mod chart;
mod dataset;
mod query;
mod rules;
mod space;
mod transform;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use chart::{check_r0, emit_chart_spec, validate_chart_spec, Aggregates, ChartError, ChartSpec};
pub use dataset::{
    infer_schema, load_dataset, load_dataset_with, Dataset, DatasetError, DatasetSchema, FieldSchema, FieldType,
    TemporalPatterns, Value,
};
pub use query::{run_vis_query, VisError, VisRun};
pub use rules::{intrinsic_rules, parsimony_rules, AUXILIARY_DIMENSIONS};
pub use space::build_vis_space;
pub use transform::{aggregate, apply_transform, TransformError, TransformedTable};

/// The element meaning "unmapped" or "not applied".
pub const NONE: &str = "none";

/// Dimension names of the visualization space, in space order.
pub mod dims {
    pub const MARK: &str = "mark-type";
    pub const X: &str = "x";
    pub const Y: &str = "y";
    pub const COLOR: &str = "color";
    pub const SIZE: &str = "size";
    pub const GROUP_BY: &str = "group-by";
    pub const AGGREGATE_X: &str = "aggregate-x";
    pub const AGGREGATE_Y: &str = "aggregate-y";
    pub const AGGREGATE_SIZE: &str = "aggregate-size";
    pub const SORT: &str = "sort";
    pub const ORDER: &str = "order";

    pub const ALL: [&str; 11] = [
        MARK,
        X,
        Y,
        COLOR,
        SIZE,
        GROUP_BY,
        AGGREGATE_X,
        AGGREGATE_Y,
        AGGREGATE_SIZE,
        SORT,
        ORDER,
    ];
}

pub const MARKS: [&str; 4] = ["bar", "line", "point", "pie"];
pub const ORDERS: [&str; 3] = ["ascending", "descending", "none"];
pub const AGGREGATE_METHODS: [AggregateMethod; 5] = AggregateMethod::ALL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Bar,
    Line,
    Point,
    Pie,
}

impl Mark {
    pub const ALL: [Mark; 4] = [Mark::Bar, Mark::Line, Mark::Point, Mark::Pie];

    pub fn as_str(self) -> &'static str {
        match self {
            Mark::Bar => "bar",
            Mark::Line => "line",
            Mark::Point => "point",
            Mark::Pie => "pie",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateMethod {
    Average,
    Sum,
    Count,
    Min,
    Max,
}

impl AggregateMethod {
    pub const ALL: [AggregateMethod; 5] = [
        AggregateMethod::Average,
        AggregateMethod::Sum,
        AggregateMethod::Count,
        AggregateMethod::Min,
        AggregateMethod::Max,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AggregateMethod::Average => "average",
            AggregateMethod::Sum => "sum",
            AggregateMethod::Count => "count",
            AggregateMethod::Min => "min",
            AggregateMethod::Max => "max",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    /// Whether the method does arithmetic on its input.
    pub fn needs_numbers(self) -> bool {
        self != AggregateMethod::Count
    }
}

impl fmt::Display for AggregateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    Ascending,
    Descending,
}

impl SortOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            SortOrder::Ascending => "ascending",
            SortOrder::Descending => "descending",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ascending" => Some(SortOrder::Ascending),
            "descending" => Some(SortOrder::Descending),
            _ => None,
        }
    }
}
