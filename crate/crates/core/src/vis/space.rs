//! The eleven-dimension visualization space over a dataset schema.

use super::dataset::{DatasetSchema, FieldType};
use super::{dims, AGGREGATE_METHODS, MARKS, NONE, ORDERS};
use crate::space::{DesignSpace, Dimension, MetaInfo};

fn type_note(t: FieldType) -> &'static str {
    match t {
        FieldType::Categorical => "categorical field",
        FieldType::Numerical => "numerical field",
        FieldType::Temporal => "temporal field",
    }
}

/// Mark type; X over every field; Y, color, size and sort over every field
/// plus `none`; group-by over the categorical fields plus `none`; three
/// aggregation dimensions; order.
pub fn build_vis_space(schema: &DatasetSchema) -> DesignSpace {
    let fields: Vec<String> = schema.names().map(str::to_owned).collect();
    let with_none = |mut v: Vec<String>| {
        v.push(NONE.to_owned());
        v
    };
    let categorical: Vec<String> = schema.names_of(FieldType::Categorical).map(str::to_owned).collect();
    let aggregates: Vec<String> = AGGREGATE_METHODS.iter().map(|m| m.to_string()).chain([NONE.to_owned()]).collect();

    let dimensions = vec![
        Dimension::new(dims::MARK, MARKS),
        Dimension::new(dims::X, fields.clone()),
        Dimension::new(dims::Y, with_none(fields.clone())),
        Dimension::new(dims::COLOR, with_none(fields.clone())),
        Dimension::new(dims::SIZE, with_none(fields.clone())),
        Dimension::new(dims::GROUP_BY, with_none(categorical)),
        Dimension::new(dims::AGGREGATE_X, aggregates.clone()),
        Dimension::new(dims::AGGREGATE_Y, aggregates.clone()),
        Dimension::new(dims::AGGREGATE_SIZE, aggregates),
        Dimension::new(dims::SORT, with_none(fields)),
        Dimension::new(dims::ORDER, ORDERS),
    ];

    let mut meta = MetaInfo::new("data visualization designer")
        .describe_dimension(dims::MARK, "Graphical primitive that determines the chart type.")
        .describe_dimension(dims::X, "Data field mapped to the x-axis.")
        .describe_dimension(dims::Y, "Data field mapped to the y-axis, or none when the value is an aggregate count.")
        .describe_dimension(dims::COLOR, "Data field mapped to the color channel.")
        .describe_dimension(dims::SIZE, "Data field mapped to the size channel.")
        .describe_dimension(dims::GROUP_BY, "Categorical field by which records are grouped.")
        .describe_dimension(dims::AGGREGATE_X, "Method aggregating the field on x when records are grouped.")
        .describe_dimension(dims::AGGREGATE_Y, "Method aggregating the field on y when records are grouped.")
        .describe_dimension(dims::AGGREGATE_SIZE, "Method aggregating the field on size when records are grouped.")
        .describe_dimension(dims::SORT, "Data field by which records are ordered.")
        .describe_dimension(dims::ORDER, "Sorting direction; none when no sort field is set.");
    for dim in [dims::X, dims::Y, dims::COLOR, dims::SIZE, dims::SORT] {
        for f in &schema.fields {
            meta = meta.describe_element(dim, &f.name, type_note(f.field_type));
        }
    }
    for f in schema.fields.iter().filter(|f| f.field_type == FieldType::Categorical) {
        meta = meta.describe_element(dims::GROUP_BY, &f.name, type_note(f.field_type));
    }
    DesignSpace::new("visualization", meta, dimensions).expect("visualization space is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vis::dataset::infer_schema;

    #[test]
    fn three_fields_one_categorical() {
        let schema = infer_schema(b"a,b,c\nx,1,2\ny,3,4\n").unwrap();
        let space = build_vis_space(&schema);
        assert_eq!(space.dimensions().len(), 11);
        let len = |name: &str| space.dimensions()[space.dimension_index(name).unwrap()].len();
        assert_eq!(len(dims::X), 3);
        assert_eq!(len(dims::Y), 4);
        assert_eq!(len(dims::GROUP_BY), 2);
        assert_eq!(len(dims::AGGREGATE_SIZE), 6);
        let order: Vec<&str> = space.dimensions()[10].elements().collect();
        assert_eq!(order, ["ascending", "descending", "none"]);
        let marks: Vec<&str> = space.dimensions()[0].elements().collect();
        assert_eq!(marks, ["bar", "line", "point", "pie"]);
    }

    #[test]
    fn no_categorical_fields() {
        let schema = infer_schema(b"a,b\n1,2\n").unwrap();
        let space = build_vis_space(&schema);
        let g = &space.dimensions()[space.dimension_index(dims::GROUP_BY).unwrap()];
        assert_eq!(g.elements().collect::<Vec<_>>(), [NONE]);
    }
}
