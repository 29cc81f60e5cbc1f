//! The N+1 prompt pipeline: one intra-dimension prompt per dimension, then a
//! cross-dimension prompt over the surviving elements.

use serde::Serialize;
use thiserror::Error;

use super::backend::{BackendError, ChatBackend};
use super::parse::{parse_constraint_response, ParseError};
use super::prompt::{build_cross_prompt, build_dimension_prompt, PromptDocument, PromptError, PromptScope, PromptTemplates, ReferralExample};
use crate::constraint::{canonicalize, ConstraintKind, SymbolicConstraint};
use crate::par::Execution;
use crate::space::DesignSpace;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{scope}: {source}")]
    Backend {
        scope: String,
        #[source]
        source: BackendError,
    },
    #[error("{scope}: no usable response after {attempts} attempt(s); last error: {last}")]
    RetriesExhausted {
        scope: String,
        attempts: u32,
        last: ParseError,
    },
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub templates: PromptTemplates,
    pub referrals: Vec<ReferralExample>,
    /// Re-prompts allowed per step after a rejected response.
    pub max_retries: u32,
    pub execution: Execution,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            templates: PromptTemplates::default(),
            referrals: Vec::new(),
            max_retries: 1,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Parsed { constraints: usize },
    Rejected { error: String },
}

/// One completion call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptEntry {
    /// Position of the prompt in the pipeline, 0-based; the cross prompt is
    /// last.
    pub step: usize,
    pub scope: String,
    pub attempt: u32,
    pub prompt: String,
    pub response: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub transcript: Vec<TranscriptEntry>,
    /// Merged constraints in canonical order.
    pub constraints: Vec<SymbolicConstraint>,
    /// Element indices per dimension offered to the cross prompt.
    pub survivors: Vec<Vec<usize>>,
    pub cross_skipped: bool,
}

impl GenerationRecord {
    pub fn hard(&self) -> impl Iterator<Item = &SymbolicConstraint> + '_ {
        self.constraints.iter().filter(|c| !c.is_soft())
    }

    pub fn soft(&self) -> impl Iterator<Item = &SymbolicConstraint> + '_ {
        self.constraints.iter().filter(|c| c.is_soft())
    }

    pub fn retries(&self) -> usize {
        self.transcript.iter().filter(|e| e.attempt > 0).count()
    }

    /// One JSON object per completion call, newline-terminated.
    pub fn transcript_jsonl(&self) -> String {
        self.transcript
            .iter()
            .map(|e| serde_json::to_string(e).expect("entry serializes") + "\n")
            .collect()
    }
}

fn scope_label(space: &DesignSpace, scope: &PromptScope) -> String {
    match scope {
        PromptScope::Dimension(i) => format!("dimension \"{}\"", space.dimensions()[*i].name()),
        PromptScope::Cross(_) => "cross-dimension".to_owned(),
    }
}

type StepOutput = (Vec<TranscriptEntry>, Vec<SymbolicConstraint>);

fn run_step(
    space: &DesignSpace,
    doc: &PromptDocument,
    step: usize,
    backend: &dyn ChatBackend,
    config: &PipelineConfig,
) -> Result<StepOutput, PipelineError> {
    let scope = scope_label(space, doc.scope());
    let base = doc.render();
    let mut entries = Vec::new();
    let mut last_error: Option<ParseError> = None;
    for attempt in 0..=config.max_retries {
        let prompt = match &last_error {
            None => base.clone(),
            Some(e) => base.clone() + &config.templates.correction(&e.to_string()),
        };
        let response = backend.complete(&prompt).map_err(|source| PipelineError::Backend {
            scope: scope.clone(),
            source,
        })?;
        match parse_constraint_response(&response, space) {
            Ok(cs) => {
                entries.push(TranscriptEntry {
                    step,
                    scope: scope.clone(),
                    attempt,
                    prompt,
                    response,
                    outcome: Outcome::Parsed { constraints: cs.len() },
                });
                return Ok((entries, cs));
            }
            Err(e) => {
                entries.push(TranscriptEntry {
                    step,
                    scope: scope.clone(),
                    attempt,
                    prompt,
                    response,
                    outcome: Outcome::Rejected { error: e.to_string() },
                });
                last_error = Some(e);
            }
        }
    }
    Err(PipelineError::RetriesExhausted {
        scope,
        attempts: config.max_retries + 1,
        last: last_error.expect("at least one attempt"),
    })
}

/// Elements of `dim` referenced by require/prefer constraints from that
/// dimension's step; every element when none are.
fn survivors(space: &DesignSpace, dim: usize, constraints: &[SymbolicConstraint]) -> Vec<usize> {
    let mut keep: Vec<usize> = constraints
        .iter()
        .filter_map(|c| match &c.kind {
            ConstraintKind::RequireOneOf(cells) | ConstraintKind::PreferEach(cells, _) => Some(cells),
            _ => None,
        })
        .flatten()
        .filter(|r| r.dimension == dim)
        .map(|r| r.element)
        .collect();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        (0..space.dimensions()[dim].len()).collect()
    } else {
        keep
    }
}

/// Runs the intra-dimension prompts (concurrently under a parallel
/// execution policy), then the cross prompt, and merges everything in
/// canonical order. Spaces with a single dimension skip the cross prompt.
pub fn run_pipeline(
    space: &DesignSpace,
    requirement: &str,
    backend: &dyn ChatBackend,
    config: &PipelineConfig,
) -> Result<GenerationRecord, PipelineError> {
    let n = space.dimensions().len();
    let docs = (0..n)
        .map(|i| build_dimension_prompt(space, requirement, i, &config.referrals, &config.templates))
        .collect::<Result<Vec<_>, _>>()?;
    let steps: Vec<usize> = (0..n).collect();
    let outputs = config
        .execution
        .map(&steps, |&i| run_step(space, &docs[i], i, backend, config));

    let mut transcript = Vec::new();
    let mut constraints = Vec::new();
    let mut kept = Vec::with_capacity(n);
    for (i, out) in outputs.into_iter().enumerate() {
        let (entries, cs) = out?;
        kept.push(survivors(space, i, &cs));
        transcript.extend(entries);
        constraints.extend(cs);
    }

    let cross_skipped = n < 2;
    if !cross_skipped {
        let doc = build_cross_prompt(space, requirement, &kept, &config.referrals, &config.templates)?;
        let (entries, cs) = run_step(space, &doc, n, backend, config)?;
        transcript.extend(entries);
        constraints.extend(cs);
    }
    canonicalize(&mut constraints);
    Ok(GenerationRecord {
        transcript,
        constraints,
        survivors: kept,
        cross_skipped,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;
    use crate::constraint::compile;
    use crate::fixtures;
    use crate::llm::stub::StubBackend;
    use crate::space::{Dimension, MetaInfo};

    fn stub() -> StubBackend {
        StubBackend::from_json(fixtures::OPEN_PEEPS_STUB_RULES).unwrap()
    }

    #[test]
    fn open_peeps_six_prompts() {
        let space = fixtures::open_peeps_space();
        let rec = run_pipeline(&space, fixtures::OPEN_PEEPS_REQUIREMENT, &stub(), &PipelineConfig::default()).unwrap();
        assert_eq!(rec.transcript.len(), 6);
        assert_eq!(rec.retries(), 0);
        assert!(!rec.cross_skipped);
        assert_eq!(rec.hard().count(), 2);
        assert_eq!(rec.soft().count(), 2);
        assert_eq!(rec.survivors[0], vec![0, 2, 4]);
        assert_eq!(rec.survivors[1], vec![1]);
        assert_eq!(rec.survivors[2], vec![0, 1, 2, 3, 4]);
        assert_eq!(rec.transcript.last().unwrap().scope, "cross-dimension");
        assert!(rec.transcript[5].prompt.contains("  - woman high bun\n"));
        assert!(!rec.transcript[5].prompt.contains("man buzz cut"));
    }

    #[test]
    fn compiled_output_matches_hand_written_constraints() {
        let space = fixtures::open_peeps_space();
        let rec = run_pipeline(&space, fixtures::OPEN_PEEPS_REQUIREMENT, &stub(), &PipelineConfig::default()).unwrap();
        let generated = compile(&space, &rec.constraints).unwrap();
        let expected = compile(&space, &fixtures::open_peeps_constraints()).unwrap();
        let hard = |s: &crate::CompiledConstraintSet| {
            s.hard().iter().map(|r| (r.matrix.clone(), r.sense, r.rhs)).collect::<Vec<_>>()
        };
        let soft = |s: &crate::CompiledConstraintSet| {
            s.soft().iter().map(|r| (r.matrix.clone(), r.weight)).collect::<Vec<_>>()
        };
        assert_eq!(hard(&generated), hard(&expected));
        assert_eq!(soft(&generated), soft(&expected));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let space = fixtures::open_peeps_space();
        let run = |execution| {
            let cfg = PipelineConfig {
                execution,
                ..Default::default()
            };
            run_pipeline(&space, fixtures::OPEN_PEEPS_REQUIREMENT, &stub(), &cfg).unwrap()
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }

    #[test]
    fn retry_once_then_success() {
        let space = fixtures::open_peeps_space();
        let backend = stub().malformed_until_corrected();
        let rec = run_pipeline(&space, fixtures::OPEN_PEEPS_REQUIREMENT, &backend, &PipelineConfig::default()).unwrap();
        assert_eq!(rec.transcript.len(), 12);
        assert_eq!(rec.retries(), 6);
        assert!(matches!(rec.transcript[0].outcome, Outcome::Rejected { .. }));
        assert!(rec.transcript[1].prompt.contains("could not be used"));
        assert_eq!(rec.constraints.len(), 4);
    }

    #[test]
    fn retries_exhausted() {
        let space = fixtures::open_peeps_space();
        let backend = stub().malformed_until_corrected();
        let cfg = PipelineConfig {
            max_retries: 0,
            ..Default::default()
        };
        match run_pipeline(&space, "x", &backend, &cfg) {
            Err(PipelineError::RetriesExhausted { attempts: 1, last, .. }) => assert_eq!(last, ParseError::NoJsonFound),
            other => panic!("{other:?}"),
        }
    }

    struct Counting(AtomicUsize);

    impl ChatBackend for Counting {
        fn complete(&self, _: &str) -> Result<String, BackendError> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Ok("{\"hard\":[],\"soft\":[]}".into())
        }
    }

    #[test]
    fn single_dimension_skips_cross() {
        let space = DesignSpace::new("one", MetaInfo::default(), vec![Dimension::new("d", ["a", "b"])]).unwrap();
        let backend = Counting(AtomicUsize::new(0));
        let rec = run_pipeline(&space, "r", &backend, &PipelineConfig::default()).unwrap();
        assert!(rec.cross_skipped);
        assert_eq!(rec.transcript.len(), 1);
        assert_eq!(backend.0.load(Ordering::SeqCst), 1);
    }

    struct Down;

    impl ChatBackend for Down {
        fn complete(&self, _: &str) -> Result<String, BackendError> {
            Err(BackendError::Unavailable("connection refused".into()))
        }
    }

    #[test]
    fn backend_failure_surfaces() {
        let space = fixtures::open_peeps_space();
        let err = run_pipeline(&space, "r", &Down, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(err, PipelineError::Backend { .. }));
        assert!(err.to_string().contains("connection refused"));
    }

    #[test]
    fn transcript_is_json_lines() {
        let space = fixtures::open_peeps_space();
        let rec = run_pipeline(&space, fixtures::OPEN_PEEPS_REQUIREMENT, &stub(), &PipelineConfig::default()).unwrap();
        let text = rec.transcript_jsonl();
        assert_eq!(text.lines().count(), 6);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["outcome"]["status"], "parsed");
        }
    }
}
