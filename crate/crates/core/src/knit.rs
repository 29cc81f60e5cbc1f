//! Knitwear domain: the built-in design space, user extensions, and the
//! composition of a selected design into a text-to-image prompt.

use thiserror::Error;

use crate::constraint::{compile, CompileError, CompiledConstraintSet};
use crate::fixtures;
use crate::llm::{run_pipeline, ChatBackend, GenerationRecord, PipelineConfig, PipelineError};
use crate::solution::SolutionMatrix;
use crate::solver::{solve_with, SolveError, SolveResult, SolverConfig};
use crate::space::{Cardinality, DesignSpace, Dimension, SpaceError};

#[derive(Debug, Error)]
pub enum KnitError {
    #[error("template: unclosed slot starting at byte {0}")]
    UnclosedSlot(usize),
    #[error("template: unmatched '}}' at byte {0}")]
    UnmatchedBrace(usize),
    #[error("template: empty slot at byte {0}")]
    EmptySlot(usize),
    #[error("template: slot \"{0}\" appears more than once")]
    DuplicateSlot(String),
    #[error("template: slot \"{0}\" names no dimension of the space")]
    UnknownSlot(String),
    #[error("dimension \"{dimension}\" has {count} selected elements, expected 1")]
    Selection { dimension: String, count: usize },
    #[error("element \"{element}\" occurs {count} times in the composed prompt")]
    Repeated { element: String, count: usize },
    #[error("solution shape does not match the space")]
    Shape,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// The shipped six-dimension knitwear space.
pub fn builtin_knit_space() -> DesignSpace {
    DesignSpace::from_json(fixtures::KNIT_SPACE).expect("built-in knitwear space is valid")
}

/// Appends the elements and dimensions of `extension` to `base`. Shared
/// dimensions keep the base order and gain the new elements at the end;
/// new dimensions are appended. Descriptions from the extension fill gaps
/// and never replace the base's.
pub fn merge_spaces(base: &DesignSpace, extension: &DesignSpace) -> Result<DesignSpace, KnitError> {
    let mut dims: Vec<(String, Vec<String>, Cardinality)> = base
        .dimensions()
        .iter()
        .map(|d| (d.name().to_owned(), d.elements().map(str::to_owned).collect(), d.cardinality()))
        .collect();
    for d in extension.dimensions() {
        match dims.iter_mut().find(|(name, ..)| name == d.name()) {
            Some((_, elements, _)) => {
                for e in d.elements() {
                    if !elements.iter().any(|x| x == e) {
                        elements.push(e.to_owned());
                    }
                }
            }
            None => dims.push((d.name().to_owned(), d.elements().map(str::to_owned).collect(), d.cardinality())),
        }
    }
    let mut meta = base.meta().clone();
    let ext = extension.meta();
    if meta.audience.is_empty() {
        meta.audience = ext.audience.clone();
    }
    for (dim, text) in &ext.dimension_descriptions {
        meta.dimension_descriptions.entry(dim.clone()).or_insert_with(|| text.clone());
    }
    for (dim, elements) in &ext.element_descriptions {
        let target = meta.element_descriptions.entry(dim.clone()).or_default();
        for (e, text) in elements {
            let slot = target.entry(e.clone()).or_insert(None);
            if slot.is_none() {
                *slot = text.clone();
            }
        }
    }
    let dimensions = dims
        .into_iter()
        .map(|(name, elements, card)| {
            let d = Dimension::new(name, elements);
            if card == Cardinality::EXACTLY_ONE {
                d
            } else {
                d.with_cardinality(card)
            }
        })
        .collect();
    Ok(DesignSpace::new(base.name(), meta, dimensions)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Part {
    Text(String),
    Slot(String),
}

/// Free text with `{dimension name}` placeholders, each used at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    parts: Vec<Part>,
}

impl PromptTemplate {
    pub fn parse(text: &str) -> Result<Self, KnitError> {
        let mut parts = Vec::new();
        let mut rest = text;
        let mut offset = 0;
        while let Some(open) = rest.find(['{', '}']) {
            if rest.as_bytes()[open] == b'}' {
                return Err(KnitError::UnmatchedBrace(offset + open));
            }
            let close = rest[open..]
                .find('}')
                .map(|c| open + c)
                .ok_or(KnitError::UnclosedSlot(offset + open))?;
            let name = rest[open + 1..close].trim();
            if name.is_empty() {
                return Err(KnitError::EmptySlot(offset + open));
            }
            if name.contains('{') {
                return Err(KnitError::UnclosedSlot(offset + open));
            }
            if parts.iter().any(|p| matches!(p, Part::Slot(s) if s == name)) {
                return Err(KnitError::DuplicateSlot(name.to_owned()));
            }
            if open > 0 {
                parts.push(Part::Text(rest[..open].to_owned()));
            }
            parts.push(Part::Slot(name.to_owned()));
            offset += close + 1;
            rest = &rest[close + 1..];
        }
        if !rest.is_empty() {
            parts.push(Part::Text(rest.to_owned()));
        }
        Ok(Self { parts })
    }

    /// The shipped knitwear template.
    pub fn builtin() -> Self {
        Self::parse(fixtures::KNIT_TEMPLATE.trim_end()).expect("built-in template parses")
    }

    pub fn slots(&self) -> impl Iterator<Item = &str> + '_ {
        self.parts.iter().filter_map(|p| match p {
            Part::Slot(s) => Some(s.as_str()),
            Part::Text(_) => None,
        })
    }
}

/// Fills the template with the element selected in each slot's dimension.
/// Dimensions the template does not mention are appended as a
/// comma-separated list. Fails unless every selected name occurs exactly
/// once in the result.
pub fn compose_image_prompt(
    space: &DesignSpace,
    x: &SolutionMatrix,
    template: &PromptTemplate,
) -> Result<String, KnitError> {
    if x.shape() != space.padded_shape() {
        return Err(KnitError::Shape);
    }
    for s in template.slots() {
        if space.dimension_index(s).is_none() {
            return Err(KnitError::UnknownSlot(s.to_owned()));
        }
    }
    let mut selected: Vec<&str> = Vec::with_capacity(space.dimensions().len());
    for (i, d) in space.dimensions().iter().enumerate() {
        let chosen: Vec<usize> = (0..d.len()).filter(|&j| x.get(i, j) == 1).collect();
        if chosen.len() != 1 {
            return Err(KnitError::Selection {
                dimension: d.name().to_owned(),
                count: chosen.len(),
            });
        }
        selected.push(d.element(chosen[0]).expect("index within dimension"));
    }
    let mut out = String::new();
    for p in &template.parts {
        match p {
            Part::Text(t) => out.push_str(t),
            Part::Slot(s) => out.push_str(selected[space.dimension_index(s).expect("checked above")]),
        }
    }
    for (i, d) in space.dimensions().iter().enumerate() {
        if !template.slots().any(|s| s == d.name()) {
            if !out.is_empty() {
                out.push_str(", ");
            }
            out.push_str(selected[i]);
        }
    }
    for e in &selected {
        let count = out.matches(e).count();
        if count != 1 {
            return Err(KnitError::Repeated {
                element: (*e).to_owned(),
                count,
            });
        }
    }
    Ok(out)
}

/// Everything a knitwear run produced. `prompt` is absent when the
/// generated constraints are infeasible.
#[derive(Debug, Clone)]
pub struct KnitRun {
    pub record: GenerationRecord,
    pub compiled: CompiledConstraintSet,
    pub result: SolveResult,
    pub prompt: Option<String>,
}

/// Requirement to constraints to an optimal design to an image prompt.
pub fn run_knit(
    space: &DesignSpace,
    requirement: &str,
    backend: &dyn ChatBackend,
    pipeline: &PipelineConfig,
    solver: &SolverConfig,
    template: &PromptTemplate,
) -> Result<KnitRun, KnitError> {
    let record = run_pipeline(space, requirement, backend, pipeline)?;
    let compiled = compile(space, &record.constraints)?;
    let result = solve_with(space, &compiled, *solver)?;
    let prompt = match &result.solution {
        Some(x) => Some(compose_image_prompt(space, x, template)?),
        None => None,
    };
    Ok(KnitRun {
        record,
        compiled,
        result,
        prompt,
    })
}
