//! Validation of model responses against the constraint-response schema:
//!
//! ```json
//! {"hard": [{"kind": "require_one_of", "dimension": "head", "elements": ["..."], "rationale": "..."}],
//!  "soft": [{"kind": "prefer", "cells": [{"dimension": "...", "element": "..."}], "weight": 1}]}
//! ```

use serde_json::{Map, Value};
use thiserror::Error;

use crate::constraint::{ConstraintKind, SymbolicConstraint, DEFAULT_WEIGHT};
use crate::space::{DesignSpace, ElementRef, SpaceError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("no JSON object found in the response")]
    NoJsonFound,
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("unknown element(s): {}", .names.join(", "))]
    UnknownElement { names: Vec<String> },
}

const HARD_KINDS: [&str; 4] = ["require_one_of", "forbid", "together", "exclusive"];
const SOFT_KINDS: [&str; 2] = ["prefer", "avoid"];
const ENTRY_FIELDS: [&str; 7] = ["kind", "dimension", "elements", "element", "cells", "weight", "rationale"];

/// First JSON object in `text`, skipping prose and code fences around it.
pub fn extract_json(text: &str) -> Option<Value> {
    text.match_indices('{').find_map(|(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(v @ Value::Object(_))) => Some(v),
            _ => None,
        }
    })
}

fn violation(path: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::SchemaViolation {
        path: path.into(),
        message: message.into(),
    }
}

fn string_at<'a>(v: &'a Value, path: &str) -> Result<&'a str, ParseError> {
    v.as_str().ok_or_else(|| violation(path, "expected a string"))
}

struct Resolver<'a> {
    space: &'a DesignSpace,
    unknown: Vec<String>,
}

impl Resolver<'_> {
    fn resolve(&mut self, dimension: &str, element: &str) -> Option<ElementRef> {
        match self.space.lookup(dimension, element) {
            Ok(r) => Some(r),
            Err(SpaceError::UnknownDimension(name)) => {
                self.note(format!("dimension \"{name}\""));
                None
            }
            Err(_) => {
                self.note(element.to_owned());
                None
            }
        }
    }

    fn note(&mut self, name: String) {
        if !self.unknown.contains(&name) {
            self.unknown.push(name);
        }
    }
}

fn entry_cells(entry: &Map<String, Value>, path: &str, r: &mut Resolver) -> Result<Vec<ElementRef>, ParseError> {
    let has_cells = entry.contains_key("cells");
    let has_dim = entry.contains_key("dimension");
    let mut out = Vec::new();
    let mut missing = false;
    let mut push = |cell: Option<ElementRef>| match cell {
        Some(c) => out.push(c),
        None => missing = true,
    };
    match (has_cells, has_dim) {
        (true, true) => return Err(violation(path, "give either \"cells\" or \"dimension\", not both")),
        (false, false) => return Err(violation(path, "missing \"cells\" or \"dimension\"")),
        (true, false) => {
            if entry.contains_key("elements") || entry.contains_key("element") {
                return Err(violation(path, "\"elements\" is only valid with \"dimension\""));
            }
            let p = format!("{path}.cells");
            let cells = entry["cells"].as_array().ok_or_else(|| violation(&p, "expected an array"))?;
            for (k, cell) in cells.iter().enumerate() {
                let cp = format!("{p}[{k}]");
                let obj = cell.as_object().ok_or_else(|| violation(&cp, "expected an object"))?;
                if let Some(key) = obj.keys().find(|k| *k != "dimension" && *k != "element") {
                    return Err(violation(&cp, format!("unexpected field \"{key}\"")));
                }
                let d = string_at(obj.get("dimension").unwrap_or(&Value::Null), &format!("{cp}.dimension"))?;
                let e = string_at(obj.get("element").unwrap_or(&Value::Null), &format!("{cp}.element"))?;
                push(r.resolve(d, e));
            }
        }
        (false, true) => {
            let d = string_at(&entry["dimension"], &format!("{path}.dimension"))?;
            let names: Vec<&str> = match (entry.get("elements"), entry.get("element")) {
                (Some(_), Some(_)) => return Err(violation(path, "give either \"elements\" or \"element\", not both")),
                (None, None) => return Err(violation(path, "missing \"elements\"")),
                (Some(list), None) => {
                    let p = format!("{path}.elements");
                    let list = list.as_array().ok_or_else(|| violation(&p, "expected an array"))?;
                    list.iter()
                        .enumerate()
                        .map(|(k, v)| string_at(v, &format!("{p}[{k}]")))
                        .collect::<Result<_, _>>()?
                }
                (None, Some(one)) => vec![string_at(one, &format!("{path}.element"))?],
            };
            for e in names {
                push(r.resolve(d, e));
            }
        }
    }
    if out.is_empty() && !missing {
        return Err(violation(path, "no cells referenced"));
    }
    Ok(out)
}

fn parse_entry(
    entry: &Value,
    path: &str,
    soft: bool,
    r: &mut Resolver,
) -> Result<Option<SymbolicConstraint>, ParseError> {
    let obj = entry.as_object().ok_or_else(|| violation(path, "expected an object"))?;
    if let Some(key) = obj.keys().find(|k| !ENTRY_FIELDS.contains(&k.as_str())) {
        return Err(violation(path, format!("unexpected field \"{key}\"")));
    }
    let kind = string_at(obj.get("kind").unwrap_or(&Value::Null), &format!("{path}.kind"))?;
    let allowed: &[&str] = if soft { &SOFT_KINDS } else { &HARD_KINDS };
    if !allowed.contains(&kind) {
        return Err(violation(
            format!("{path}.kind"),
            format!("\"{kind}\" is not one of {}", allowed.join(", ")),
        ));
    }
    let weight = match obj.get("weight") {
        None => DEFAULT_WEIGHT,
        Some(_) if !soft => return Err(violation(format!("{path}.weight"), "hard constraints take no weight")),
        Some(w) => match w.as_f64() {
            Some(w) if w.is_finite() && w > 0.0 => w,
            _ => return Err(violation(format!("{path}.weight"), "expected a positive number")),
        },
    };
    let rationale = match obj.get("rationale") {
        None | Some(Value::Null) => None,
        Some(v) => Some(string_at(v, &format!("{path}.rationale"))?.to_owned()),
    };
    let before = r.unknown.len();
    let cells = entry_cells(obj, path, r)?;
    let pair = matches!(kind, "together" | "exclusive");
    let count = cells.len() + (r.unknown.len() - before);
    if pair && count != 2 {
        return Err(violation(path, format!("\"{kind}\" takes exactly two cells, found {count}")));
    }
    if r.unknown.len() > before {
        return Ok(None);
    }
    let kind = match kind {
        "require_one_of" => ConstraintKind::RequireOneOf(cells),
        "forbid" => ConstraintKind::Forbid(cells),
        "together" => ConstraintKind::Together(cells[0], cells[1]),
        "exclusive" => ConstraintKind::Exclusive(cells[0], cells[1]),
        "prefer" => ConstraintKind::PreferEach(cells, weight),
        "avoid" => ConstraintKind::AvoidEach(cells, weight),
        _ => unreachable!("kind checked above"),
    };
    Ok(Some(SymbolicConstraint { kind, rationale }))
}

/// Extracts, validates and resolves a constraint response. Hard entries come
/// before soft entries, each in document order. Every unknown name in the
/// document is reported together.
pub fn parse_constraint_response(text: &str, space: &DesignSpace) -> Result<Vec<SymbolicConstraint>, ParseError> {
    let doc = extract_json(text).ok_or(ParseError::NoJsonFound)?;
    let obj = doc.as_object().expect("extract_json returns objects");
    if let Some(key) = obj.keys().find(|k| *k != "hard" && *k != "soft") {
        return Err(violation("$", format!("unexpected field \"{key}\"")));
    }
    let mut r = Resolver {
        space,
        unknown: Vec::new(),
    };
    let mut out = Vec::new();
    for (section, soft) in [("hard", false), ("soft", true)] {
        let entries = match obj.get(section) {
            None | Some(Value::Null) => continue,
            Some(Value::Array(a)) => a,
            Some(_) => return Err(violation(section, "expected an array")),
        };
        for (i, e) in entries.iter().enumerate() {
            if let Some(c) = parse_entry(e, &format!("{section}[{i}]"), soft, &mut r)? {
                out.push(c);
            }
        }
    }
    if !r.unknown.is_empty() {
        return Err(ParseError::UnknownElement { names: r.unknown });
    }
    Ok(out)
}
