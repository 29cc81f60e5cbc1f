//! Constraint generation from natural-language requirements through a chat
//! model: prompt construction, response parsing, backends and the pipeline.

mod backend;
mod parse;
mod pipeline;
mod prompt;
mod stub;

pub use backend::{BackendError, ChatBackend, ConfigError, LiveBackend, LlmConfig, API_KEY_ENV};
pub use parse::{extract_json, parse_constraint_response, ParseError};
pub use pipeline::{run_pipeline, GenerationRecord, Outcome, PipelineConfig, PipelineError, TranscriptEntry};
pub use prompt::{
    build_cross_prompt, build_dimension_prompt, referrals_from_json, PromptDocument, PromptError,
    PromptScope, PromptTemplates, ReferralExample, SegmentLabel, DEFAULT_TEMPLATES,
};
pub use stub::{StubBackend, StubResponse, StubRule, StubRules};
