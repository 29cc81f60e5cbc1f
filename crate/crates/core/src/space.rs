//! Design spaces: an ordered product of dimensions, each a finite list of
//! named elements, plus descriptive meta-information.
//!
//! Spaces are loaded from a JSON document and validated once; afterwards they
//! are immutable. Elements are addressed either by index ([`ElementRef`]) or by
//! name ([`ElementName`]). Indices are 0-based and follow document order.

use std::fmt;

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("malformed design-space document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid design space at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("unknown dimension \"{0}\"")]
    UnknownDimension(String),
    #[error("unknown element \"{element}\" in dimension \"{dimension}\"")]
    UnknownElement { dimension: String, element: String },
    #[error("element reference ({dimension}, {element}) is outside the space")]
    OutOfRange { dimension: usize, element: usize },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> SpaceError {
    SpaceError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

/// Inclusive range on the number of elements selected in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Cardinality {
    pub min: usize,
    pub max: usize,
}

impl Cardinality {
    pub const EXACTLY_ONE: Cardinality = Cardinality { min: 1, max: 1 };

    pub fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, count: usize) -> bool {
        self.min <= count && count <= self.max
    }
}

impl Default for Cardinality {
    fn default() -> Self {
        Self::EXACTLY_ONE
    }
}

impl From<[usize; 2]> for Cardinality {
    fn from([min, max]: [usize; 2]) -> Self {
        Self { min, max }
    }
}

impl From<Cardinality> for [usize; 2] {
    fn from(c: Cardinality) -> Self {
        [c.min, c.max]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dimension {
    name: String,
    elements: IndexSet<String>,
    cardinality: Cardinality,
    /// Whether the source document spelled out the cardinality.
    declared: bool,
    /// Position of the first repeated name in the input list, if any.
    duplicate: Option<usize>,
}

impl Dimension {
    /// A dimension with the default exactly-one cardinality. Duplicate
    /// element names are reported when the dimension is placed in a space.
    pub fn new<I, S>(name: impl Into<String>, elements: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = IndexSet::new();
        let mut duplicate = None;
        for (j, e) in elements.into_iter().enumerate() {
            if !set.insert(e.into()) && duplicate.is_none() {
                duplicate = Some(j);
            }
        }
        Self {
            name: name.into(),
            elements: set,
            cardinality: Cardinality::EXACTLY_ONE,
            declared: false,
            duplicate,
        }
    }

    pub fn with_cardinality(mut self, cardinality: Cardinality) -> Self {
        self.cardinality = cardinality;
        self.declared = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.elements.iter().map(String::as_str)
    }

    pub fn element(&self, index: usize) -> Option<&str> {
        self.elements.get_index(index).map(String::as_str)
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.elements.get_index_of(name)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn cardinality(&self) -> Cardinality {
        self.cardinality
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetaInfo {
    pub audience: String,
    pub dimension_descriptions: IndexMap<String, String>,
    pub element_descriptions: IndexMap<String, IndexMap<String, Option<String>>>,
}

impl MetaInfo {
    pub fn new(audience: impl Into<String>) -> Self {
        Self {
            audience: audience.into(),
            ..Self::default()
        }
    }

    pub fn describe_dimension(mut self, dim: impl Into<String>, text: impl Into<String>) -> Self {
        self.dimension_descriptions.insert(dim.into(), text.into());
        self
    }

    pub fn describe_element(
        mut self,
        dim: impl Into<String>,
        element: impl Into<String>,
        text: impl Into<String>,
    ) -> Self {
        self.element_descriptions
            .entry(dim.into())
            .or_default()
            .insert(element.into(), Some(text.into()));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.audience.is_empty()
            && self.dimension_descriptions.is_empty()
            && self.element_descriptions.is_empty()
    }
}

/// Index address of one element: `(dimension, element)`, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementRef {
    pub dimension: usize,
    pub element: usize,
}

impl ElementRef {
    pub const fn new(dimension: usize, element: usize) -> Self {
        Self { dimension, element }
    }
}

impl fmt::Display for ElementRef {
    /// Uses the 1-based `e_ij` notation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e_{},{}", self.dimension + 1, self.element + 1)
    }
}

/// Name address of one element, as it appears in documents and model output.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementName {
    pub dimension: String,
    pub element: String,
}

impl ElementName {
    pub fn new(dimension: impl Into<String>, element: impl Into<String>) -> Self {
        Self {
            dimension: dimension.into(),
            element: element.into(),
        }
    }
}

impl fmt::Display for ElementName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.dimension, self.element)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDocument", into = "SpaceDocument")]
pub struct DesignSpace {
    name: String,
    meta: MetaInfo,
    dimensions: Vec<Dimension>,
}

impl DesignSpace {
    pub fn new(
        name: impl Into<String>,
        meta: MetaInfo,
        dimensions: Vec<Dimension>,
    ) -> Result<Self, SpaceError> {
        let space = Self {
            name: name.into(),
            meta,
            dimensions,
        };
        space.validate()?;
        Ok(space)
    }

    /// Parses and validates a design-space JSON document.
    pub fn from_json(text: &str) -> Result<Self, SpaceError> {
        let doc: SpaceDocument = serde_json::from_str(text)?;
        Self::try_from(doc)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("design space serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn meta(&self) -> &MetaInfo {
        &self.meta
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    pub fn dimension(&self, index: usize) -> Option<&Dimension> {
        self.dimensions.get(index)
    }

    pub fn dimension_index(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    /// `(n, m)`: dimension count and widest dimension.
    pub fn padded_shape(&self) -> (usize, usize) {
        let m = self.dimensions.iter().map(Dimension::len).max().unwrap_or(0);
        (self.dimensions.len(), m)
    }

    /// Element count of every dimension, in order.
    pub fn row_lengths(&self) -> Vec<usize> {
        self.dimensions.iter().map(Dimension::len).collect()
    }

    pub fn contains(&self, r: ElementRef) -> bool {
        self.dimensions
            .get(r.dimension)
            .is_some_and(|d| r.element < d.len())
    }

    pub fn check_ref(&self, r: ElementRef) -> Result<ElementRef, SpaceError> {
        if self.contains(r) {
            Ok(r)
        } else {
            Err(SpaceError::OutOfRange {
                dimension: r.dimension,
                element: r.element,
            })
        }
    }

    pub fn resolve(&self, name: &ElementName) -> Result<ElementRef, SpaceError> {
        let d = self
            .dimension_index(&name.dimension)
            .ok_or_else(|| SpaceError::UnknownDimension(name.dimension.clone()))?;
        let e = self.dimensions[d]
            .element_index(&name.element)
            .ok_or_else(|| SpaceError::UnknownElement {
                dimension: name.dimension.clone(),
                element: name.element.clone(),
            })?;
        Ok(ElementRef::new(d, e))
    }

    /// Convenience for `resolve` with string slices.
    pub fn lookup(&self, dimension: &str, element: &str) -> Result<ElementRef, SpaceError> {
        self.resolve(&ElementName::new(dimension, element))
    }

    pub fn name_of(&self, r: ElementRef) -> Result<ElementName, SpaceError> {
        self.check_ref(r)?;
        let dim = &self.dimensions[r.dimension];
        Ok(ElementName::new(
            dim.name.clone(),
            dim.element(r.element).expect("checked").to_owned(),
        ))
    }

    /// Number of complete selections the space admits under cardinality.
    /// Saturates at `u128::MAX`.
    pub fn selection_count(&self) -> u128 {
        self.dimensions
            .iter()
            .map(|d| subsets_in_range(d.len(), d.cardinality))
            .fold(1u128, |acc, c| acc.saturating_mul(c))
    }

    fn validate(&self) -> Result<(), SpaceError> {
        if self.dimensions.is_empty() {
            return Err(invalid("dimensions", "a design space needs at least one dimension"));
        }
        let mut seen = IndexSet::new();
        for (i, dim) in self.dimensions.iter().enumerate() {
            let path = format!("dimensions[{i}]");
            if dim.name.is_empty() {
                return Err(invalid(format!("{path}.name"), "dimension name is empty"));
            }
            if !seen.insert(dim.name.as_str()) {
                return Err(invalid(
                    format!("{path}.name"),
                    format!("duplicate dimension name \"{}\"", dim.name),
                ));
            }
            if dim.is_empty() {
                return Err(invalid(
                    format!("{path}.elements"),
                    format!("dimension \"{}\" has no elements", dim.name),
                ));
            }
            if let Some(j) = dim.duplicate {
                return Err(invalid(
                    format!("{path}.elements[{j}]"),
                    format!("dimension \"{}\" repeats an element name", dim.name),
                ));
            }
            if let Some(j) = dim.elements.iter().position(String::is_empty) {
                return Err(invalid(
                    format!("{path}.elements[{j}]"),
                    "element name is empty",
                ));
            }
            let c = dim.cardinality;
            if c.min > c.max || c.max > dim.len() {
                return Err(invalid(
                    format!("{path}.cardinality"),
                    format!(
                        "cardinality [{}, {}] must satisfy 0 <= min <= max <= {}",
                        c.min,
                        c.max,
                        dim.len()
                    ),
                ));
            }
        }
        for key in self.meta.dimension_descriptions.keys() {
            if self.dimension_index(key).is_none() {
                return Err(invalid(
                    format!("meta.dimensions.{key}"),
                    format!("description for unknown dimension \"{key}\""),
                ));
            }
        }
        for (dim, elements) in &self.meta.element_descriptions {
            let Some(d) = self.dimension_index(dim) else {
                return Err(invalid(
                    format!("meta.elements.{dim}"),
                    format!("descriptions for unknown dimension \"{dim}\""),
                ));
            };
            for element in elements.keys() {
                if self.dimensions[d].element_index(element).is_none() {
                    return Err(invalid(
                        format!("meta.elements.{dim}.{element}"),
                        format!("description for unknown element \"{element}\""),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// `sum_{k=min}^{max} C(len, k)`, saturating.
pub(crate) fn subsets_in_range(len: usize, c: Cardinality) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128; // C(len, 0)
    for k in 0..=len.min(c.max) {
        if k >= c.min {
            total = total.saturating_add(binom);
        }
        binom = binom.saturating_mul((len - k) as u128) / (k as u128 + 1);
    }
    total
}

// ---- document form -------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceDocument {
    name: String,
    #[serde(default, skip_serializing_if = "MetaDocument::is_empty")]
    meta: MetaDocument,
    dimensions: Vec<DimensionDocument>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaDocument {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    audience: String,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    dimensions: IndexMap<String, String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    elements: IndexMap<String, IndexMap<String, Option<String>>>,
}

impl MetaDocument {
    fn is_empty(&self) -> bool {
        self.audience.is_empty() && self.dimensions.is_empty() && self.elements.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimensionDocument {
    name: String,
    elements: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cardinality: Option<Cardinality>,
}

impl TryFrom<SpaceDocument> for DesignSpace {
    type Error = SpaceError;

    fn try_from(doc: SpaceDocument) -> Result<Self, SpaceError> {
        let dimensions = doc
            .dimensions
            .into_iter()
            .map(|d| {
                let dim = Dimension::new(d.name, d.elements);
                match d.cardinality {
                    Some(c) => dim.with_cardinality(c),
                    None => dim,
                }
            })
            .collect();
        let meta = MetaInfo {
            audience: doc.meta.audience,
            dimension_descriptions: doc.meta.dimensions,
            element_descriptions: doc.meta.elements,
        };
        DesignSpace::new(doc.name, meta, dimensions)
    }
}

impl From<DesignSpace> for SpaceDocument {
    fn from(space: DesignSpace) -> Self {
        SpaceDocument {
            name: space.name,
            meta: MetaDocument {
                audience: space.meta.audience,
                dimensions: space.meta.dimension_descriptions,
                elements: space.meta.element_descriptions,
            },
            dimensions: space
                .dimensions
                .into_iter()
                .map(|d| DimensionDocument {
                    cardinality: d.declared.then_some(d.cardinality),
                    name: d.name,
                    elements: d.elements.into_iter().collect(),
                })
                .collect(),
        }
    }
}
