//! `cods`: validate design spaces, solve constraint documents, run the
//! constraint-generation pipeline, and drive the visualization and knitwear
//! domains.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use cods_core::constraint::{compile, constraints_from_json, CompileError, CompiledConstraintSet, ConstraintEntry};
use cods_core::fixtures;
use cods_core::knit::{builtin_knit_space, merge_spaces, run_knit, KnitError, PromptTemplate};
use cods_core::llm::{
    referrals_from_json, run_pipeline, BackendError, ChatBackend, GenerationRecord, LiveBackend, LlmConfig,
    PipelineConfig, PipelineError, ReferralExample, StubBackend,
};
use cods_core::solver::{solve_with, SolveError, SolveReport, SolveResult, SolverConfig};
use cods_core::space::{DesignSpace, SpaceError};
use cods_core::vis::{apply_transform, load_dataset, run_vis_query, VisError};
use cods_core::SymbolicConstraint;

#[derive(Parser, Debug)]
#[command(name = "cods", version, about = "Design generation as constrained 0-1 optimization")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Design-space document.
    #[arg(long, global = true)]
    space: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = BackendKind::Stub)]
    backend: BackendKind,
    /// Keyword rules for the stub backend; defaults to the domain's shipped rules.
    #[arg(long, global = true)]
    stub_rules: Option<PathBuf>,
    /// Also write the compiled constraint set to `<out>.compiled.json`.
    #[arg(long, global = true)]
    emit_compiled: bool,
    /// Write every prompt and response as JSON lines.
    #[arg(long, global = true)]
    transcript: Option<PathBuf>,
    /// TOML file with an `[llm]` table.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Stub,
    Live,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a design-space document.
    Validate,
    /// Compile a constraint document against the space and solve it.
    Solve {
        #[arg(long)]
        constraints: PathBuf,
    },
    /// Generate constraints from a requirement, then solve.
    Pipeline {
        requirement: String,
        /// Referral examples shown in the prompts; defaults to the shipped character examples.
        #[arg(long)]
        referrals: Option<PathBuf>,
    },
    /// Turn a dataset and a question into a chart specification.
    Vis {
        #[arg(long)]
        dataset: PathBuf,
        query: String,
        /// Also write the grouped, aggregated and sorted table the chart draws.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Turn a garment requirement into a text-to-image prompt.
    Knit {
        requirement: String,
        /// Prompt template with `{dimension}` slots.
        #[arg(long)]
        template: Option<PathBuf>,
        /// Design-space document merged into the knitwear space.
        #[arg(long)]
        extend: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Backend(String),
    #[error("{0}")]
    RetriesExhausted(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Invalid(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Backend(_) => 4,
            CliError::RetriesExhausted(_) => 5,
            CliError::Resource(_) => 6,
        }
    }

    fn invalid(e: impl std::fmt::Display) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Backend { .. } => CliError::Backend(e.to_string()),
            PipelineError::RetriesExhausted { .. } => CliError::RetriesExhausted(e.to_string()),
            PipelineError::Prompt(_) => CliError::invalid(e),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::ResourceExceeded { .. } => CliError::Resource(e.to_string()),
            _ => CliError::invalid(e),
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        CliError::invalid(e)
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        CliError::Backend(e.to_string())
    }
}

impl From<VisError> for CliError {
    fn from(e: VisError) -> Self {
        match e {
            VisError::Pipeline(p) => p.into(),
            VisError::Solve(s) => s.into(),
            other => CliError::invalid(other),
        }
    }
}

impl From<KnitError> for CliError {
    fn from(e: KnitError) -> Self {
        match e {
            KnitError::Pipeline(p) => p.into(),
            KnitError::Solve(s) => s.into(),
            other => CliError::invalid(other),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".compiled.json");
    PathBuf::from(name)
}

fn load_space(path: &Path) -> Result<DesignSpace, CliError> {
    DesignSpace::from_json(&read(path)?).map_err(CliError::invalid)
}

/// Shipped defaults for a domain: stub rules and referral examples.
struct Domain {
    stub_rules: &'static str,
    referrals: &'static str,
}

const CHARACTERS: Domain = Domain {
    stub_rules: fixtures::OPEN_PEEPS_STUB_RULES,
    referrals: fixtures::OPEN_PEEPS_REFERRALS,
};
const CHARTS: Domain = Domain {
    stub_rules: fixtures::VIS_STUB_RULES,
    referrals: fixtures::VIS_REFERRALS,
};
const KNITWEAR: Domain = Domain {
    stub_rules: fixtures::KNIT_STUB_RULES,
    referrals: fixtures::KNIT_REFERRALS,
};

struct Runner {
    global: Global,
    llm: LlmConfig,
}

impl Runner {
    fn new(global: Global) -> Result<Self, CliError> {
        if global.emit_compiled && global.out.is_none() {
            return Err(CliError::Invalid("--emit-compiled needs --out".into()));
        }
        let llm = match &global.config {
            Some(p) => LlmConfig::from_toml(&read(p)?).map_err(CliError::invalid)?,
            None => LlmConfig::default(),
        };
        Ok(Self { global, llm })
    }

    fn space(&self) -> Result<DesignSpace, CliError> {
        let path = self
            .global
            .space
            .as_deref()
            .ok_or_else(|| CliError::Invalid("this command needs --space".into()))?;
        load_space(path)
    }

    fn backend(&self, domain: &Domain) -> Result<Box<dyn ChatBackend>, CliError> {
        match self.global.backend {
            BackendKind::Stub => {
                let text = match &self.global.stub_rules {
                    Some(p) => read(p)?,
                    None => domain.stub_rules.to_owned(),
                };
                let stub = StubBackend::from_json(&text).map_err(|e| CliError::Invalid(format!("stub rules: {e}")))?;
                Ok(Box::new(stub))
            }
            BackendKind::Live => Ok(Box::new(LiveBackend::from_env(self.llm.clone())?)),
        }
    }

    fn pipeline_config(&self, referrals: Vec<ReferralExample>) -> PipelineConfig {
        PipelineConfig {
            referrals,
            max_retries: self.llm.max_retries,
            ..PipelineConfig::default()
        }
    }

    fn referrals(text: &str) -> Result<Vec<ReferralExample>, CliError> {
        referrals_from_json(text).map_err(|e| CliError::Invalid(format!("referrals: {e}")))
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.global.out {
            Some(p) => write_file(p, text),
            None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
        }
    }

    fn emit_compiled(&self, set: &CompiledConstraintSet) -> Result<(), CliError> {
        if let (true, Some(out)) = (self.global.emit_compiled, &self.global.out) {
            let mut text = serde_json::to_string_pretty(set).expect("compiled set serializes");
            text.push('\n');
            write_file(&sidecar(out), &text)?;
        }
        Ok(())
    }

    fn emit_transcript(&self, record: &GenerationRecord) -> Result<(), CliError> {
        match &self.global.transcript {
            Some(p) => write_file(p, &record.transcript_jsonl()),
            None => Ok(()),
        }
    }

    fn solve(&self, space: &DesignSpace, constraints: &[SymbolicConstraint]) -> Result<(CompiledConstraintSet, SolveResult), CliError> {
        let set = compile(space, constraints)?;
        let result = solve_with(space, &set, SolverConfig::default())?;
        self.emit_compiled(&set)?;
        Ok((set, result))
    }

    fn run(&self, command: &Command) -> Result<(), CliError> {
        match command {
            Command::Validate => self.validate(),
            Command::Solve { constraints } => self.solve_document(constraints),
            Command::Pipeline { requirement, referrals } => self.pipeline(requirement, referrals.as_deref()),
            Command::Vis { dataset, query, table } => self.vis(dataset, query, table.as_deref()),
            Command::Knit {
                requirement,
                template,
                extend,
            } => self.knit(requirement, template.as_deref(), extend.as_deref()),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let space = self.space()?;
        let count = space.selection_count();
        let (n, m) = space.padded_shape();
        let report = json!({
            "valid": true,
            "name": space.name(),
            "shape": [n, m],
            "dimensions": space.dimensions().iter().map(|d| json!({
                "name": d.name(),
                "elements": d.len(),
                "cardinality": [d.cardinality().min, d.cardinality().max],
            })).collect::<Vec<_>>(),
            "assignments": u64::try_from(count).map_or_else(|_| json!(count.to_string()), |c| json!(c)),
        });
        self.emit(&(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))
    }

    fn finish(&self, space: &DesignSpace, set: &CompiledConstraintSet, result: &SolveResult, extra: Option<serde_json::Value>) -> Result<(), CliError> {
        let report = SolveReport::new(space, set, result);
        let text = match extra {
            Some(mut doc) => {
                doc["solution"] = serde_json::to_value(&report).expect("report serializes");
                serde_json::to_string_pretty(&doc).expect("document serializes") + "\n"
            }
            None => report.to_json_pretty(),
        };
        self.emit(&text)?;
        if result.is_optimal() {
            Ok(())
        } else {
            Err(CliError::Infeasible("no design satisfies every hard constraint".into()))
        }
    }

    fn solve_document(&self, constraints: &Path) -> Result<(), CliError> {
        let space = self.space()?;
        let cs = constraints_from_json(&read(constraints)?, &space).map_err(CliError::invalid)?;
        let (set, result) = self.solve(&space, &cs)?;
        self.finish(&space, &set, &result, None)
    }

    fn pipeline(&self, requirement: &str, referrals: Option<&Path>) -> Result<(), CliError> {
        let space = self.space()?;
        let referrals = match referrals {
            Some(p) => Self::referrals(&read(p)?)?,
            None => Self::referrals(CHARACTERS.referrals)?,
        };
        let backend = self.backend(&CHARACTERS)?;
        let record = run_pipeline(&space, requirement, backend.as_ref(), &self.pipeline_config(referrals))?;
        self.emit_transcript(&record)?;
        let (set, result) = self.solve(&space, &record.constraints)?;
        let doc = json!({
            "requirement": requirement,
            "constraints": entries(&space, &record.constraints)?,
            "cross_skipped": record.cross_skipped,
            "prompts": record.transcript.len(),
            "retries": record.retries(),
        });
        self.finish(&space, &set, &result, Some(doc))
    }

    fn vis(&self, dataset: &Path, query: &str, table: Option<&Path>) -> Result<(), CliError> {
        let bytes = fs::read(dataset).map_err(|source| CliError::Io {
            path: dataset.display().to_string(),
            source,
        })?;
        let data = load_dataset(&bytes).map_err(|e| CliError::Invalid(format!("{}: {e}", dataset.display())))?;
        let backend = self.backend(&CHARTS)?;
        let config = self.pipeline_config(Self::referrals(CHARTS.referrals)?);
        let run = run_vis_query(&data, query, backend.as_ref(), &config, &SolverConfig::default())?;
        self.emit_transcript(&run.record)?;
        self.emit_compiled(&run.compiled)?;
        let spec = run
            .spec
            .ok_or_else(|| CliError::Infeasible("no chart design satisfies every hard constraint".into()))?;
        if let Some(p) = table {
            let t = apply_transform(&data, &spec).map_err(CliError::invalid)?;
            write_file(p, &(serde_json::to_string(&t).expect("table serializes") + "\n"))?;
        }
        self.emit(&spec.to_json())
    }

    fn knit(&self, requirement: &str, template: Option<&Path>, extend: Option<&Path>) -> Result<(), CliError> {
        let mut space = match &self.global.space {
            Some(p) => load_space(p)?,
            None => builtin_knit_space(),
        };
        if let Some(p) = extend {
            space = merge_spaces(&space, &load_space(p)?)?;
        }
        let template = match template {
            Some(p) => PromptTemplate::parse(read(p)?.trim_end())?,
            None => PromptTemplate::builtin(),
        };
        let backend = self.backend(&KNITWEAR)?;
        let config = self.pipeline_config(Self::referrals(KNITWEAR.referrals)?);
        let run = run_knit(&space, requirement, backend.as_ref(), &config, &SolverConfig::default(), &template)?;
        self.emit_transcript(&run.record)?;
        self.emit_compiled(&run.compiled)?;
        let prompt = run
            .prompt
            .ok_or_else(|| CliError::Infeasible("no garment design satisfies every hard constraint".into()))?;
        self.emit(&(prompt + "\n"))
    }
}

fn entries(space: &DesignSpace, cs: &[SymbolicConstraint]) -> Result<Vec<ConstraintEntry>, CliError> {
    cs.iter()
        .map(|c| ConstraintEntry::from_constraint(space, c))
        .collect::<Result<_, SpaceError>>()
        .map_err(CliError::invalid)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = Runner::new(cli.global).and_then(|r| r.run(&cli.command));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
