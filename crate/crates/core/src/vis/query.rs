//! End-to-end visualization query: dataset to space, requirement to
//! constraints, constraints to an optimal design, design to a chart.

use thiserror::Error;

use super::chart::{emit_chart_spec, ChartError, ChartSpec};
use super::dataset::{Dataset, DatasetSchema};
use super::rules::{intrinsic_rules, parsimony_rules};
use super::space::build_vis_space;
use crate::constraint::{compile, CompileError, CompiledConstraintSet, SymbolicConstraint};
use crate::llm::{run_pipeline, ChatBackend, GenerationRecord, PipelineConfig, PipelineError};
use crate::solver::{solve_with, SolveError, SolveResult, SolverConfig};
use crate::space::DesignSpace;

#[derive(Debug, Error)]
pub enum VisError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

/// Everything a query produced. `spec` is absent when the constraints are
/// infeasible.
#[derive(Debug, Clone)]
pub struct VisRun {
    pub schema: DatasetSchema,
    pub space: DesignSpace,
    pub record: GenerationRecord,
    /// Intrinsic rules, then generated constraints, then parsimony preferences.
    pub constraints: Vec<SymbolicConstraint>,
    pub compiled: CompiledConstraintSet,
    pub result: SolveResult,
    pub spec: Option<ChartSpec>,
}

pub fn run_vis_query(
    data: &Dataset,
    requirement: &str,
    backend: &dyn ChatBackend,
    pipeline: &PipelineConfig,
    solver: &SolverConfig,
) -> Result<VisRun, VisError> {
    let schema = data.schema.clone();
    let space = build_vis_space(&schema);
    let record = run_pipeline(&space, requirement, backend, pipeline)?;
    let mut constraints = intrinsic_rules(&space, &schema);
    constraints.extend(record.constraints.iter().cloned());
    constraints.extend(parsimony_rules(&space));
    let compiled = compile(&space, &constraints)?;
    let result = solve_with(&space, &compiled, *solver)?;
    let spec = match &result.solution {
        Some(x) => Some(emit_chart_spec(&space, x, &schema)?),
        None => None,
    };
    Ok(VisRun {
        schema,
        space,
        record,
        constraints,
        compiled,
        result,
        spec,
    })
}
