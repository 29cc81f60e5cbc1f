//! JSON form of symbolic constraints:
//!
//! ```json
//! [{"kind": "require_one_of", "cells": [{"dimension": "head", "element": "woman bangs black"}],
//!   "rationale": "..."},
//!  {"kind": "prefer", "cells": [...], "weight": 1}]
//! ```
//!
//! `together` and `exclusive` take exactly two cells. `implies` takes its
//! premises in `cells` and its conclusions in `then`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ConstraintKind, SymbolicConstraint, DEFAULT_WEIGHT};
use crate::space::{DesignSpace, ElementName, ElementRef, SpaceError};

#[derive(Debug, Error)]
pub enum ConstraintDocumentError {
    #[error("malformed constraint document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("constraint [{index}]: {message}")]
    Entry { index: usize, message: String },
    #[error("constraint [{index}]: {source}")]
    Unresolved {
        index: usize,
        #[source]
        source: SpaceError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    pub kind: String,
    pub cells: Vec<ElementName>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub then: Vec<ElementName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

impl ConstraintEntry {
    pub fn resolve(&self, space: &DesignSpace, index: usize) -> Result<SymbolicConstraint, ConstraintDocumentError> {
        let entry_err = |message: String| ConstraintDocumentError::Entry { index, message };
        let resolve_all = |names: &[ElementName]| -> Result<Vec<ElementRef>, ConstraintDocumentError> {
            names
                .iter()
                .map(|n| {
                    space
                        .resolve(n)
                        .map_err(|source| ConstraintDocumentError::Unresolved { index, source })
                })
                .collect()
        };
        let cells = resolve_all(&self.cells)?;
        let soft = matches!(self.kind.as_str(), "prefer" | "avoid");
        if self.weight.is_some() && !soft {
            return Err(entry_err(format!("kind \"{}\" does not take a weight", self.kind)));
        }
        if !self.then.is_empty() && self.kind != "implies" {
            return Err(entry_err(format!("kind \"{}\" does not take \"then\"", self.kind)));
        }
        let pair = || -> Result<(ElementRef, ElementRef), ConstraintDocumentError> {
            match cells.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(entry_err(format!(
                    "kind \"{}\" takes exactly two cells, found {}",
                    self.kind,
                    cells.len()
                ))),
            }
        };
        let weight = self.weight.unwrap_or(DEFAULT_WEIGHT);
        if soft && (weight == 0.0 || !weight.is_finite()) {
            return Err(entry_err(format!("weight {weight} must be finite and non-zero")));
        }
        let kind = match self.kind.as_str() {
            "require_one_of" => ConstraintKind::RequireOneOf(cells.clone()),
            "forbid" => ConstraintKind::Forbid(cells.clone()),
            "prefer" => ConstraintKind::PreferEach(cells.clone(), weight.abs()),
            "avoid" => ConstraintKind::AvoidEach(cells.clone(), weight.abs()),
            "together" => {
                let (a, b) = pair()?;
                ConstraintKind::Together(a, b)
            }
            "exclusive" => {
                let (a, b) = pair()?;
                ConstraintKind::Exclusive(a, b)
            }
            "implies" => ConstraintKind::Implies {
                premises: cells.clone(),
                conclusions: resolve_all(&self.then)?,
            },
            other => return Err(entry_err(format!("unknown kind \"{other}\""))),
        };
        if !matches!(kind, ConstraintKind::Implies { .. }) && cells.is_empty() {
            return Err(entry_err("no cells".to_owned()));
        }
        Ok(SymbolicConstraint {
            kind,
            rationale: self.rationale.clone(),
        })
    }

    pub fn from_constraint(space: &DesignSpace, c: &SymbolicConstraint) -> Result<Self, SpaceError> {
        let names = |refs: &[ElementRef]| -> Result<Vec<ElementName>, SpaceError> {
            refs.iter().map(|&r| space.name_of(r)).collect()
        };
        let (cells, then) = match &c.kind {
            ConstraintKind::Implies {
                premises,
                conclusions,
            } => (names(premises)?, names(conclusions)?),
            kind => (names(&kind.cells())?, Vec::new()),
        };
        Ok(Self {
            kind: c.kind.keyword().to_owned(),
            cells,
            then,
            weight: c.kind.weight().map(f64::abs),
            rationale: c.rationale.clone(),
        })
    }
}

/// Parses a constraint document and resolves every cell against `space`.
pub fn constraints_from_json(
    text: &str,
    space: &DesignSpace,
) -> Result<Vec<SymbolicConstraint>, ConstraintDocumentError> {
    let entries: Vec<ConstraintEntry> = serde_json::from_str(text)?;
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| e.resolve(space, i))
        .collect()
}

pub fn constraints_to_json(
    space: &DesignSpace,
    constraints: &[SymbolicConstraint],
) -> Result<String, SpaceError> {
    let entries = constraints
        .iter()
        .map(|c| ConstraintEntry::from_constraint(space, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(serde_json::to_string_pretty(&entries).expect("entries serialize"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn shipped_constraint_file_parses() {
        let space = fixtures::open_peeps_space();
        let cs = constraints_from_json(fixtures::OPEN_PEEPS_CONSTRAINTS, &space).unwrap();
        assert_eq!(cs.len(), 4);
        assert_eq!(cs, fixtures::open_peeps_constraints());
        assert!(cs[0].rationale.is_some());
    }

    #[test]
    fn document_roundtrip() {
        let space = fixtures::open_peeps_space();
        let cs = fixtures::open_peeps_constraints();
        let text = constraints_to_json(&space, &cs).unwrap();
        assert_eq!(constraints_from_json(&text, &space).unwrap(), cs);
    }

    #[test]
    fn default_weight_and_implies() {
        let space = fixtures::open_peeps_space();
        let doc = r#"[
            {"kind":"avoid","cells":[{"dimension":"face","element":"angry"}]},
            {"kind":"implies","cells":[{"dimension":"head","element":"man buzz cut"}],
             "then":[{"dimension":"facial-hair","element":"stubble"}]}
        ]"#;
        let cs = constraints_from_json(doc, &space).unwrap();
        assert_eq!(cs[0].kind, ConstraintKind::AvoidEach(vec![ElementRef::new(1, 2)], 1.0));
        assert_eq!(
            cs[1].kind,
            ConstraintKind::Implies {
                premises: vec![ElementRef::new(0, 3)],
                conclusions: vec![ElementRef::new(3, 3)]
            }
        );
    }

    #[test]
    fn entry_errors() {
        let space = fixtures::open_peeps_space();
        let cases = [
            r#"[{"kind":"teleport","cells":[{"dimension":"face","element":"calm"}]}]"#,
            r#"[{"kind":"together","cells":[{"dimension":"face","element":"calm"}]}]"#,
            r#"[{"kind":"forbid","cells":[{"dimension":"face","element":"calm"}],"weight":2}]"#,
            r#"[{"kind":"prefer","cells":[{"dimension":"face","element":"calm"}],"weight":0}]"#,
            r#"[{"kind":"forbid","cells":[]}]"#,
        ];
        for doc in cases {
            assert!(
                matches!(constraints_from_json(doc, &space), Err(ConstraintDocumentError::Entry { index: 0, .. })),
                "{doc}"
            );
        }
        let unknown = r#"[{"kind":"forbid","cells":[{"dimension":"head","element":"mohawk"}]}]"#;
        let err = constraints_from_json(unknown, &space).unwrap_err();
        assert!(err.to_string().contains("mohawk"));
        assert!(matches!(constraints_from_json("{", &space), Err(ConstraintDocumentError::Parse(_))));
    }
}
