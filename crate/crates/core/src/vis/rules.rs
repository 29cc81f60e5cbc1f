//! Intrinsic hard rules of the visualization space and the default
//! parsimony preferences.

use super::dataset::{DatasetSchema, FieldType};
use super::{dims, AggregateMethod, NONE};
use crate::constraint::SymbolicConstraint;
use crate::space::{DesignSpace, ElementRef};

/// Aggregations that need numeric input.
const NUMERIC_METHODS: [AggregateMethod; 4] = [
    AggregateMethod::Average,
    AggregateMethod::Sum,
    AggregateMethod::Min,
    AggregateMethod::Max,
];

struct Cells<'a>(&'a DesignSpace);

impl Cells<'_> {
    fn at(&self, dim: &str, element: &str) -> ElementRef {
        self.0
            .lookup(dim, element)
            .unwrap_or_else(|e| panic!("not a visualization space: {e}"))
    }

    fn methods(&self, dim: &str, methods: &[AggregateMethod]) -> Vec<ElementRef> {
        methods.iter().map(|m| self.at(dim, m.as_str())).collect()
    }
}

/// The hard rules every visualization design must satisfy:
///
/// 1. `order` is none exactly when `sort` is none.
/// 2. An aggregation on y or size needs that channel mapped, except that
///    counting with y unmapped is allowed.
/// 3. Aggregating without a group-by field needs a categorical x or an
///    unmapped y.
/// 4. A pie maps color, and with y unmapped it counts.
/// 5. Size maps numerical fields only.
/// 6. X is always mapped.
/// 7. Average, sum, min and max apply to numerical fields only.
///
/// Panics when `space` was not built by `build_vis_space` from `schema`.
pub fn intrinsic_rules(space: &DesignSpace, schema: &DatasetSchema) -> Vec<SymbolicConstraint> {
    let c = Cells(space);
    let mut out = Vec::new();
    let non_numeric: Vec<&str> = schema
        .fields
        .iter()
        .filter(|f| f.field_type != FieldType::Numerical)
        .map(|f| f.name.as_str())
        .collect();

    out.push(
        SymbolicConstraint::together(c.at(dims::ORDER, NONE), c.at(dims::SORT, NONE))
            .with_rationale("A direction is set exactly when a sort field is."),
    );

    for m in AggregateMethod::ALL {
        out.push(
            SymbolicConstraint::exclusive(c.at(dims::SIZE, NONE), c.at(dims::AGGREGATE_SIZE, m.as_str()))
                .with_rationale("Aggregating size needs a field on size."),
        );
    }
    for m in NUMERIC_METHODS {
        out.push(
            SymbolicConstraint::exclusive(c.at(dims::Y, NONE), c.at(dims::AGGREGATE_Y, m.as_str()))
                .with_rationale("Only count can produce a value when y is unmapped."),
        );
    }

    let mut escape: Vec<ElementRef> = schema
        .names_of(FieldType::Categorical)
        .map(|f| c.at(dims::X, f))
        .collect();
    escape.push(c.at(dims::Y, NONE));
    for dim in [dims::AGGREGATE_X, dims::AGGREGATE_Y, dims::AGGREGATE_SIZE] {
        for m in AggregateMethod::ALL {
            out.push(
                SymbolicConstraint::implies(
                    vec![c.at(dims::GROUP_BY, NONE), c.at(dim, m.as_str())],
                    escape.clone(),
                )
                .with_rationale("Aggregation without a group-by field groups by a categorical x or counts records."),
            );
        }
    }

    out.push(
        SymbolicConstraint::exclusive(c.at(dims::MARK, "pie"), c.at(dims::COLOR, NONE))
            .with_rationale("Pie slices are told apart by color."),
    );
    out.push(
        SymbolicConstraint::implies(
            vec![c.at(dims::MARK, "pie"), c.at(dims::Y, NONE)],
            vec![c.at(dims::AGGREGATE_Y, AggregateMethod::Count.as_str())],
        )
        .with_rationale("A pie needs a value: a field on y or a count."),
    );

    let non_numeric_size: Vec<ElementRef> = non_numeric.iter().map(|f| c.at(dims::SIZE, f)).collect();
    if !non_numeric_size.is_empty() {
        out.push(SymbolicConstraint::forbid(non_numeric_size).with_rationale("Size encodes magnitude."));
    }

    out.push(
        SymbolicConstraint::require_one_of(schema.names().map(|f| c.at(dims::X, f)).collect::<Vec<_>>())
            .with_rationale("Every chart maps a field to x."),
    );

    for (channel, agg) in [(dims::X, dims::AGGREGATE_X), (dims::Y, dims::AGGREGATE_Y)] {
        for f in &non_numeric {
            for m in c.methods(agg, &NUMERIC_METHODS) {
                out.push(
                    SymbolicConstraint::exclusive(c.at(channel, f), m)
                        .with_rationale("Arithmetic aggregation needs a numerical field."),
                );
            }
        }
    }
    out
}

/// Dimensions that default to `none` unless the requirement asks otherwise.
pub const AUXILIARY_DIMENSIONS: [&str; 8] = [
    dims::COLOR,
    dims::SIZE,
    dims::GROUP_BY,
    dims::AGGREGATE_X,
    dims::AGGREGATE_Y,
    dims::AGGREGATE_SIZE,
    dims::SORT,
    dims::ORDER,
];

/// Unit preference for `none` on every auxiliary dimension, so that
/// channels stay unmapped unless a constraint asks for them.
pub fn parsimony_rules(space: &DesignSpace) -> Vec<SymbolicConstraint> {
    let c = Cells(space);
    AUXILIARY_DIMENSIONS
        .iter()
        .map(|d| SymbolicConstraint::prefer(vec![c.at(d, NONE)], 1.0).with_rationale("Keep unrequested channels empty."))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{check_feasible, compile};
    use crate::solution::SolutionMatrix;
    use crate::solver::{brute_force_solve, solve};
    use crate::vis::dataset::infer_schema;
    use crate::vis::space::build_vis_space;

    fn setup(csv: &str) -> (DesignSpace, DatasetSchema) {
        let schema = infer_schema(csv.as_bytes()).unwrap();
        (build_vis_space(&schema), schema)
    }

    fn feasible_with(space: &DesignSpace, schema: &DatasetSchema, picks: &[(&str, &str)]) -> bool {
        let mut refs: Vec<ElementRef> = Vec::new();
        for d in space.dimensions() {
            let e = picks
                .iter()
                .find(|(dim, _)| *dim == d.name())
                .map(|(_, e)| *e)
                .unwrap_or(if d.name() == dims::X || d.name() == dims::MARK { d.element(0).unwrap() } else { NONE });
            refs.push(space.lookup(d.name(), e).unwrap());
        }
        let x = SolutionMatrix::from_refs(space, &refs).unwrap();
        let set = compile(space, &intrinsic_rules(space, schema)).unwrap();
        check_feasible(&set, &x).feasible
    }

    #[test]
    fn sort_order_coupling() {
        let (space, schema) = setup("a,b\nx,1\n");
        assert!(feasible_with(&space, &schema, &[]));
        assert!(!feasible_with(&space, &schema, &[(dims::SORT, "b")]));
        assert!(!feasible_with(&space, &schema, &[(dims::ORDER, "ascending")]));
        assert!(feasible_with(&space, &schema, &[(dims::SORT, "b"), (dims::ORDER, "descending")]));
    }

    #[test]
    fn no_numeric_fields_forces_size_none() {
        let (space, schema) = setup("a,b\nx,y\n");
        let rules = intrinsic_rules(&space, &schema);
        let size = space.dimension_index(dims::SIZE).unwrap();
        for f in ["a", "b"] {
            let mut cs = rules.clone();
            cs.push(SymbolicConstraint::require_one_of(vec![space.lookup(dims::SIZE, f).unwrap()]));
            let set = compile(&space, &cs).unwrap();
            assert!(!solve(&space, &set).unwrap().is_optimal());
        }
        let set = compile(&space, &rules).unwrap();
        let x = solve(&space, &set).unwrap().solution.unwrap();
        assert_eq!(space.dimensions()[size].element(x.selected().find(|r| r.dimension == size).unwrap().element), Some(NONE));
    }

    #[test]
    fn ungrouped_aggregation_needs_valueless_y_when_x_is_numeric() {
        // Two numerical fields: with group-by none every aggregation is none
        // unless y is unmapped. Checked by enumeration over all designs.
        let (space, schema) = setup("a,b\n1,2\n");
        let y_none = space.lookup(dims::Y, NONE).unwrap();
        let aggs: Vec<usize> = [dims::AGGREGATE_X, dims::AGGREGATE_Y, dims::AGGREGATE_SIZE]
            .iter()
            .map(|d| space.dimension_index(d).unwrap())
            .collect();
        let rules = intrinsic_rules(&space, &schema);
        let set = compile(&space, &rules).unwrap();
        let n = space.dimensions().len();
        let lens = space.row_lengths();
        let mut digits = vec![0usize; n];
        let mut feasible = 0;
        loop {
            let refs: Vec<ElementRef> = digits.iter().enumerate().map(|(i, &j)| ElementRef::new(i, j)).collect();
            let x = SolutionMatrix::from_refs(&space, &refs).unwrap();
            if check_feasible(&set, &x).feasible {
                feasible += 1;
                if !x.is_selected(y_none) {
                    for &a in &aggs {
                        assert_eq!(space.dimensions()[a].element(digits[a]), Some(NONE));
                    }
                }
            }
            let mut i = n;
            loop {
                if i == 0 {
                    assert!(feasible > 0);
                    return;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < lens[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
    }

    #[test]
    fn pie_needs_color_and_value() {
        let (space, schema) = setup("a,b\nx,1\n");
        assert!(!feasible_with(&space, &schema, &[(dims::MARK, "pie"), (dims::Y, "b")]));
        assert!(feasible_with(&space, &schema, &[(dims::MARK, "pie"), (dims::Y, "b"), (dims::COLOR, "a")]));
        assert!(!feasible_with(&space, &schema, &[(dims::MARK, "pie"), (dims::COLOR, "a")]));
        assert!(feasible_with(
            &space,
            &schema,
            &[(dims::MARK, "pie"), (dims::COLOR, "a"), (dims::AGGREGATE_Y, "count")]
        ));
    }

    #[test]
    fn arithmetic_aggregation_on_text_is_rejected() {
        let (space, schema) = setup("a,b\nx,1\n");
        assert!(!feasible_with(&space, &schema, &[(dims::Y, "a"), (dims::AGGREGATE_Y, "sum")]));
        assert!(feasible_with(&space, &schema, &[(dims::Y, "a"), (dims::AGGREGATE_Y, "count")]));
        assert!(feasible_with(&space, &schema, &[(dims::Y, "b"), (dims::AGGREGATE_Y, "sum")]));
        assert!(!feasible_with(&space, &schema, &[(dims::Y, "b"), (dims::AGGREGATE_SIZE, "sum")]));
    }

    #[test]
    fn parsimony_defaults_to_bare_chart() {
        let (space, schema) = setup("a,b\nx,1\n");
        let mut cs = intrinsic_rules(&space, &schema);
        cs.extend(parsimony_rules(&space));
        let set = compile(&space, &cs).unwrap();
        let r = solve(&space, &set).unwrap();
        assert_eq!(r.objective, Some(8.0));
        assert!(r.same_outcome(&brute_force_solve(&space, &set).unwrap()));
    }
}
