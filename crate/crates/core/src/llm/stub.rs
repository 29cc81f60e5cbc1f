//! Deterministic offline backend driven by keyword rules.
//!
//! A rule fires when all of its keywords occur in the prompt's requirement
//! line as whole words (case-insensitive). For an intra-dimension prompt the
//! stub answers with the fired entries whose cells all lie in the target
//! dimension; for a cross prompt, with the entries spanning two or more
//! dimensions. Entries naming elements the prompt does not list are dropped,
//! so one rule file can serve several spaces.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::{json, Value};

use super::backend::{BackendError, ChatBackend};
use super::prompt::{CORRECTION_HEADER, REQUIREMENT_MARKER, SEGMENT_HEADER, TARGET_DIMENSIONS_MARKER, TARGET_DIMENSION_MARKER};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubRules {
    pub rules: Vec<StubRule>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubRule {
    pub keywords: Vec<String>,
    pub response: StubResponse,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubResponse {
    #[serde(default)]
    pub hard: Vec<Value>,
    #[serde(default)]
    pub soft: Vec<Value>,
}

impl StubRules {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Default)]
pub struct StubBackend {
    rules: StubRules,
    malformed_until_corrected: bool,
}

const MALFORMED: &str = "I'm sorry, I was not able to produce the constraints in the requested format.";

/// Whether `needle` occurs in `haystack` delimited by non-alphanumerics.
/// Both arguments are expected in lowercase.
fn contains_word(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return true;
    }
    haystack.match_indices(needle).any(|(i, _)| {
        let before = haystack[..i].chars().next_back();
        let after = haystack[i + needle.len()..].chars().next();
        !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
    })
}

enum Scope {
    Dimension(String),
    Cross,
}

struct PromptView {
    requirement: String,
    scope: Option<Scope>,
    listed: BTreeMap<String, BTreeSet<String>>,
}

fn read_prompt(prompt: &str) -> PromptView {
    let mut requirement = String::new();
    let mut scope = None;
    let mut listed: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut in_space = false;
    let mut current: Option<String> = None;
    for line in prompt.lines() {
        if let Some(label) = line.strip_prefix(SEGMENT_HEADER) {
            in_space = label == "design_space_description";
            current = None;
            continue;
        }
        if requirement.is_empty() {
            if let Some(r) = line.strip_prefix(REQUIREMENT_MARKER) {
                requirement = r.to_lowercase();
                continue;
            }
        }
        if scope.is_none() {
            if line.starts_with(TARGET_DIMENSIONS_MARKER) {
                scope = Some(Scope::Cross);
                continue;
            }
            if let Some(d) = line.strip_prefix(TARGET_DIMENSION_MARKER) {
                scope = Some(Scope::Dimension(d.to_owned()));
                continue;
            }
        }
        if in_space {
            if let Some(d) = line.strip_prefix("Dimension: ") {
                current = Some(d.to_owned());
            } else if let (Some(d), Some(e)) = (&current, line.strip_prefix("  - ")) {
                listed.entry(d.clone()).or_default().insert(e.to_owned());
            }
        }
    }
    PromptView {
        requirement,
        scope,
        listed,
    }
}

/// `(dimension, element)` pairs named by a response entry.
fn entry_cells(entry: &Value) -> Vec<(String, String)> {
    let s = |v: &Value| v.as_str().unwrap_or_default().to_owned();
    if let Some(cells) = entry.get("cells").and_then(Value::as_array) {
        return cells
            .iter()
            .map(|c| (s(&c["dimension"]), s(&c["element"])))
            .collect();
    }
    let dim = s(&entry["dimension"]);
    let mut names: Vec<String> = entry
        .get("elements")
        .and_then(Value::as_array)
        .map(|a| a.iter().map(s).collect())
        .unwrap_or_default();
    if let Some(e) = entry.get("element") {
        names.push(s(e));
    }
    names.into_iter().map(|e| (dim.clone(), e)).collect()
}

impl StubBackend {
    pub fn new(rules: StubRules) -> Self {
        Self {
            rules,
            malformed_until_corrected: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        Ok(Self::new(StubRules::from_json(text)?))
    }

    /// Answers every prompt that carries no correction block with prose
    /// instead of JSON, to exercise the retry path.
    pub fn malformed_until_corrected(mut self) -> Self {
        self.malformed_until_corrected = true;
        self
    }

    /// The JSON response for `prompt`, as a value.
    pub fn respond(&self, prompt: &str) -> Value {
        let view = read_prompt(prompt);
        let keep = |entry: &Value| -> bool {
            let cells = entry_cells(entry);
            let listed = cells
                .iter()
                .all(|(d, e)| view.listed.get(d).is_some_and(|set| set.contains(e)));
            let dims: BTreeSet<&str> = cells.iter().map(|(d, _)| d.as_str()).collect();
            let in_scope = match &view.scope {
                Some(Scope::Dimension(target)) => dims.len() == 1 && dims.contains(target.as_str()),
                Some(Scope::Cross) => dims.len() >= 2,
                None => false,
            };
            !cells.is_empty() && listed && in_scope
        };
        let (mut hard, mut soft) = (Vec::new(), Vec::new());
        for rule in &self.rules.rules {
            let fired = rule
                .keywords
                .iter()
                .all(|k| contains_word(&view.requirement, &k.to_lowercase()));
            if !fired {
                continue;
            }
            hard.extend(rule.response.hard.iter().filter(|e| keep(e)).cloned());
            soft.extend(rule.response.soft.iter().filter(|e| keep(e)).cloned());
        }
        json!({"hard": hard, "soft": soft})
    }
}

impl ChatBackend for StubBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        if self.malformed_until_corrected && !prompt.contains(CORRECTION_HEADER) {
            return Ok(MALFORMED.to_owned());
        }
        Ok(serde_json::to_string(&self.respond(prompt)).expect("json value serializes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::llm::prompt::{build_cross_prompt, build_dimension_prompt, PromptTemplates};

    #[test]
    fn word_matching() {
        assert!(contains_word("a cool and sporty girl", "girl"));
        assert!(!contains_word("a cool and sporty girlfriend", "girl"));
        assert!(!contains_word("uncool", "cool"));
        assert!(contains_word("'date address from' and", "date address from"));
        assert!(contains_word("cool", "cool"));
    }

    #[test]
    fn intra_and_cross_routing() {
        let space = fixtures::open_peeps_space();
        let stub = StubBackend::from_json(fixtures::OPEN_PEEPS_STUB_RULES).unwrap();
        let t = PromptTemplates::default();
        let req = fixtures::OPEN_PEEPS_REQUIREMENT;
        let head = build_dimension_prompt(&space, req, 0, &[], &t).unwrap().render();
        let r = stub.respond(&head);
        assert_eq!(r["hard"].as_array().unwrap().len(), 1);
        assert_eq!(r["hard"][0]["dimension"], "head");
        assert!(r["soft"].as_array().unwrap().is_empty());

        let body = build_dimension_prompt(&space, req, 4, &[], &t).unwrap().render();
        assert_eq!(stub.respond(&body), json!({"hard": [], "soft": []}));

        let all: Vec<Vec<usize>> = space.dimensions().iter().map(|d| (0..d.len()).collect()).collect();
        let cross = build_cross_prompt(&space, req, &all, &[], &t).unwrap().render();
        let r = stub.respond(&cross);
        assert_eq!(r["soft"].as_array().unwrap().len(), 1);
        assert_eq!(r["soft"][0]["cells"][1]["element"], "sporty tee");

        let mut keep = all.clone();
        keep[4] = vec![0];
        let cross = build_cross_prompt(&space, req, &keep, &[], &t).unwrap().render();
        assert!(stub.respond(&cross)["soft"].as_array().unwrap().is_empty());
    }

    #[test]
    fn pure_and_empty() {
        let space = fixtures::open_peeps_space();
        let t = PromptTemplates::default();
        let p = build_dimension_prompt(&space, fixtures::OPEN_PEEPS_REQUIREMENT, 0, &[], &t).unwrap().render();
        let stub = StubBackend::from_json(fixtures::OPEN_PEEPS_STUB_RULES).unwrap();
        assert_eq!(stub.complete(&p).unwrap(), stub.complete(&p).unwrap());
        let empty = StubBackend::default();
        assert_eq!(empty.complete(&p).unwrap(), r#"{"hard":[],"soft":[]}"#);
    }

    #[test]
    fn malformed_until_corrected() {
        let stub = StubBackend::default().malformed_until_corrected();
        assert_eq!(stub.complete("x").unwrap(), MALFORMED);
        let corrected = format!("x\n{CORRECTION_HEADER}\nplease");
        assert_eq!(stub.complete(&corrected).unwrap(), r#"{"hard":[],"soft":[]}"#);
    }
}
