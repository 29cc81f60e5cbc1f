//! Six-segment prompt documents for intra- and cross-dimension constraint
//! generation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::DesignSpace;

pub const DEFAULT_TEMPLATES: &str = include_str!("../../data/prompts/default.toml");

/// Line prefixes the rendered prompt uses for machine-readable markers.
pub const REQUIREMENT_MARKER: &str = "User requirement: ";
pub const TARGET_DIMENSION_MARKER: &str = "Target dimension: ";
pub const TARGET_DIMENSIONS_MARKER: &str = "Target dimensions: ";
pub const SEGMENT_HEADER: &str = "### ";
/// Header of the block appended when re-prompting after a parse error.
pub const CORRECTION_HEADER: &str = "### correction";

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("dimension index {0} is out of range")]
    InvalidDimension(usize),
    #[error("no surviving elements for dimension \"{0}\"")]
    EmptySurvivors(String),
    #[error("survivor index {index} is out of range for dimension \"{dimension}\"")]
    InvalidSurvivor { dimension: String, index: usize },
    #[error("survivor list has {found} entries, the space has {expected} dimensions")]
    SurvivorShape { expected: usize, found: usize },
    #[error("invalid prompt templates: {0}")]
    Templates(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentLabel {
    RoleSetting,
    TaskBriefing,
    DesignSpaceDescription,
    ConstraintReasoning,
    OutputRegulation,
    ReferralExamples,
}

impl SegmentLabel {
    pub const ALL: [SegmentLabel; 6] = [
        SegmentLabel::RoleSetting,
        SegmentLabel::TaskBriefing,
        SegmentLabel::DesignSpaceDescription,
        SegmentLabel::ConstraintReasoning,
        SegmentLabel::OutputRegulation,
        SegmentLabel::ReferralExamples,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SegmentLabel::RoleSetting => "role_setting",
            SegmentLabel::TaskBriefing => "task_briefing",
            SegmentLabel::DesignSpaceDescription => "design_space_description",
            SegmentLabel::ConstraintReasoning => "constraint_reasoning",
            SegmentLabel::OutputRegulation => "output_regulation",
            SegmentLabel::ReferralExamples => "referral_examples",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "dimensions", rename_all = "snake_case")]
pub enum PromptScope {
    Dimension(usize),
    Cross(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptDocument {
    segments: Vec<(SegmentLabel, String)>,
    scope: PromptScope,
}

impl PromptDocument {
    fn new(scope: PromptScope, texts: [String; 6]) -> Self {
        Self {
            segments: SegmentLabel::ALL.into_iter().zip(texts).collect(),
            scope,
        }
    }

    pub fn scope(&self) -> &PromptScope {
        &self.scope
    }

    pub fn segments(&self) -> &[(SegmentLabel, String)] {
        &self.segments
    }

    pub fn labels(&self) -> Vec<SegmentLabel> {
        self.segments.iter().map(|(l, _)| *l).collect()
    }

    pub fn segment(&self, label: SegmentLabel) -> Option<&str> {
        self.segments
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, t)| t.as_str())
    }

    /// Segments under `### <label>` headers, separated by blank lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, (label, text)) in self.segments.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "{SEGMENT_HEADER}{}", label.as_str());
            out.push_str(text.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Segment texts with `{audience}`, `{requirement}`, `{dimension}` and
/// `{dimensions}` placeholders.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplates {
    pub role_setting: String,
    pub task_intra: String,
    pub task_cross: String,
    pub reasoning_common: String,
    pub reasoning_intra: String,
    pub reasoning_cross: String,
    pub output_regulation: String,
    pub no_examples: String,
    pub corrective: String,
}

impl PromptTemplates {
    pub fn from_toml(text: &str) -> Result<Self, PromptError> {
        toml::from_str(text).map_err(|e| PromptError::Templates(e.to_string()))
    }

    /// Follow-up appended after a rejected response.
    pub fn correction(&self, error: &str) -> String {
        format!(
            "\n{CORRECTION_HEADER}\n{}\n",
            self.corrective.replace("{error}", error).trim()
        )
    }
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self::from_toml(DEFAULT_TEMPLATES).expect("built-in templates parse")
    }
}

/// A worked request/response pair shown to the model. Examples with a
/// `dimension` illustrate intra-dimension answers; the rest illustrate
/// cross-dimension answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferralExample {
    pub requirement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<String>,
    pub response: serde_json::Value,
}

pub fn referrals_from_json(text: &str) -> Result<Vec<ReferralExample>, serde_json::Error> {
    serde_json::from_str(text)
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn fill(template: &str, space: &DesignSpace, requirement: &str, dimension: &str, dimensions: &str) -> String {
    let audience = if space.meta().audience.is_empty() {
        "designer"
    } else {
        space.meta().audience.as_str()
    };
    template
        .replace("{audience}", audience)
        .replace("{requirement}", requirement)
        .replace("{dimensions}", dimensions)
        .replace("{dimension}", dimension)
        .trim()
        .to_owned()
}

fn describe_dimension(out: &mut String, space: &DesignSpace, dim: usize, keep: &[usize]) {
    let d = &space.dimensions()[dim];
    let _ = writeln!(out, "Dimension: {}", d.name());
    if let Some(def) = space.meta().dimension_descriptions.get(d.name()) {
        let _ = writeln!(out, "Definition: {}", single_line(def));
    }
    let c = d.cardinality();
    if c.min == c.max {
        let _ = writeln!(out, "Select exactly {} element(s).", c.min);
    } else {
        let _ = writeln!(out, "Select between {} and {} elements.", c.min, c.max);
    }
    out.push_str("Elements:\n");
    let descriptions = space.meta().element_descriptions.get(d.name());
    for &j in keep {
        let name = d.element(j).expect("survivor index in range");
        let _ = writeln!(out, "  - {name}");
        if let Some(Some(text)) = descriptions.and_then(|m| m.get(name)) {
            let _ = writeln!(out, "    {}", single_line(text));
        }
    }
}

fn examples_segment(examples: &[&ReferralExample], templates: &PromptTemplates) -> String {
    if examples.is_empty() {
        return templates.no_examples.trim().to_owned();
    }
    let mut out = String::new();
    for (i, ex) in examples.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "Example requirement: {}", single_line(&ex.requirement));
        if let Some(d) = &ex.dimension {
            let _ = writeln!(out, "Example dimension: {d}");
        }
        let _ = writeln!(
            out,
            "Example response: {}",
            serde_json::to_string(&ex.response).expect("json value serializes")
        );
    }
    out
}

/// Prompt for constraints inside dimension `dim`.
pub fn build_dimension_prompt(
    space: &DesignSpace,
    requirement: &str,
    dim: usize,
    examples: &[ReferralExample],
    templates: &PromptTemplates,
) -> Result<PromptDocument, PromptError> {
    let d = space.dimension(dim).ok_or(PromptError::InvalidDimension(dim))?;
    let req = single_line(requirement);
    let f = |t: &str| fill(t, space, &req, d.name(), d.name());

    let task = format!(
        "{}\n\n{REQUIREMENT_MARKER}{req}\n{TARGET_DIMENSION_MARKER}{}",
        f(&templates.task_intra),
        d.name()
    );
    let mut description = format!("Design space \"{}\".\n", space.name());
    describe_dimension(&mut description, space, dim, &(0..d.len()).collect::<Vec<_>>());
    let reasoning = format!("{}\n{}", f(&templates.reasoning_common), f(&templates.reasoning_intra));
    let intra: Vec<&ReferralExample> = examples.iter().filter(|e| e.dimension.is_some()).collect();

    Ok(PromptDocument::new(
        PromptScope::Dimension(dim),
        [
            f(&templates.role_setting),
            task,
            description,
            reasoning,
            f(&templates.output_regulation),
            examples_segment(&intra, templates),
        ],
    ))
}

/// Prompt for constraints across dimensions, listing only `surviving`
/// element indices per dimension.
pub fn build_cross_prompt(
    space: &DesignSpace,
    requirement: &str,
    surviving: &[Vec<usize>],
    examples: &[ReferralExample],
    templates: &PromptTemplates,
) -> Result<PromptDocument, PromptError> {
    let n = space.dimensions().len();
    if surviving.len() != n {
        return Err(PromptError::SurvivorShape {
            expected: n,
            found: surviving.len(),
        });
    }
    for (d, keep) in space.dimensions().iter().zip(surviving) {
        if keep.is_empty() {
            return Err(PromptError::EmptySurvivors(d.name().to_owned()));
        }
        if let Some(&index) = keep.iter().find(|&&j| j >= d.len()) {
            return Err(PromptError::InvalidSurvivor {
                dimension: d.name().to_owned(),
                index,
            });
        }
    }
    let req = single_line(requirement);
    let names: Vec<&str> = space.dimensions().iter().map(|d| d.name()).collect();
    let joined = names.join(", ");
    let f = |t: &str| fill(t, space, &req, &joined, &joined);

    let task = format!(
        "{}\n\n{REQUIREMENT_MARKER}{req}\n{TARGET_DIMENSIONS_MARKER}{joined}",
        f(&templates.task_cross)
    );
    let mut description = format!("Design space \"{}\".\n", space.name());
    for (i, keep) in surviving.iter().enumerate() {
        if i > 0 {
            description.push('\n');
        }
        describe_dimension(&mut description, space, i, keep);
    }
    let reasoning = format!("{}\n{}", f(&templates.reasoning_common), f(&templates.reasoning_cross));
    let cross: Vec<&ReferralExample> = examples.iter().filter(|e| e.dimension.is_none()).collect();

    Ok(PromptDocument::new(
        PromptScope::Cross((0..n).collect()),
        [
            f(&templates.role_setting),
            task,
            description,
            reasoning,
            f(&templates.output_regulation),
            examples_segment(&cross, templates),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn dimension_prompt_structure() {
        let space = fixtures::open_peeps_space();
        let doc = build_dimension_prompt(&space, fixtures::OPEN_PEEPS_REQUIREMENT, 0, &[], &PromptTemplates::default())
            .unwrap();
        assert_eq!(doc.labels(), SegmentLabel::ALL);
        assert!(doc.segment(SegmentLabel::RoleSetting).unwrap().contains("illustration designer"));
        let desc = doc.segment(SegmentLabel::DesignSpaceDescription).unwrap();
        for e in space.dimensions()[0].elements() {
            assert!(desc.contains(&format!("  - {e}\n")), "{e}");
        }
        assert!(!desc.contains("calm"));
        assert_eq!(
            doc.segment(SegmentLabel::ReferralExamples).unwrap(),
            PromptTemplates::default().no_examples
        );
        let text = doc.render();
        assert!(text.contains("User requirement: a cool and sporty girl character\n"));
        assert!(text.contains("Target dimension: head\n"));
        let headers: Vec<&str> = text.lines().filter(|l| l.starts_with(SEGMENT_HEADER)).collect();
        assert_eq!(headers.len(), 6);
    }

    #[test]
    fn examples_split_by_scope() {
        let space = fixtures::open_peeps_space();
        let examples = referrals_from_json(fixtures::OPEN_PEEPS_REFERRALS).unwrap();
        let t = PromptTemplates::default();
        let intra = build_dimension_prompt(&space, "x", 3, &examples, &t).unwrap();
        let seg = intra.segment(SegmentLabel::ReferralExamples).unwrap();
        assert!(seg.contains("Example dimension: facial-hair"));
        let all: Vec<Vec<usize>> = space.dimensions().iter().map(|d| (0..d.len()).collect()).collect();
        let cross = build_cross_prompt(&space, "x", &all, &examples, &t).unwrap();
        let seg = cross.segment(SegmentLabel::ReferralExamples).unwrap();
        assert!(seg.contains("button shirt") && !seg.contains("Example dimension"));
    }

    #[test]
    fn cross_prompt_lists_survivors_only() {
        let space = fixtures::open_peeps_space();
        let mut keep: Vec<Vec<usize>> = space.dimensions().iter().map(|d| (0..d.len()).collect()).collect();
        keep[0] = vec![0];
        let doc = build_cross_prompt(&space, "r", &keep, &[], &PromptTemplates::default()).unwrap();
        let desc = doc.segment(SegmentLabel::DesignSpaceDescription).unwrap();
        assert!(desc.contains("  - woman bangs black\n"));
        assert!(!desc.contains("man short side part") && !desc.contains("man buzz cut"));
        assert!(desc.contains("  - sporty tee\n"));
        assert_eq!(doc.scope(), &PromptScope::Cross(vec![0, 1, 2, 3, 4]));
        assert!(doc.render().contains("Target dimensions: head, face, accessories, facial-hair, body\n"));

        keep[2].clear();
        assert_eq!(
            build_cross_prompt(&space, "r", &keep, &[], &PromptTemplates::default()).unwrap_err(),
            PromptError::EmptySurvivors("accessories".into())
        );
    }

    #[test]
    fn invalid_dimension() {
        let space = fixtures::open_peeps_space();
        assert_eq!(
            build_dimension_prompt(&space, "r", 9, &[], &PromptTemplates::default()).unwrap_err(),
            PromptError::InvalidDimension(9)
        );
    }
}
