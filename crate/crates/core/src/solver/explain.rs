use serde::Serialize;

use super::SolveResult;
use crate::constraint::{check_feasible, CompiledConstraintSet, RuleOrigin, Sense};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftContribution {
    pub index: usize,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    pub weight: f64,
    pub hits: i64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardStatus {
    pub index: usize,
    pub label: String,
    pub achieved: i64,
    pub sense: Sense,
    pub rhs: i64,
    /// The row holds with equality, so it constrains the optimum.
    pub binding: bool,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub soft: Vec<SoftContribution>,
    pub hard: Vec<HardStatus>,
    pub total: f64,
}

fn rationale(origin: &RuleOrigin) -> Option<String> {
    match origin {
        RuleOrigin::Constraint { rationale, .. } => rationale.clone(),
        _ => None,
    }
}

/// Per-rule breakdown of an optimal result. Returns `None` when the result
/// carries no solution.
pub fn explain(result: &SolveResult, set: &CompiledConstraintSet) -> Option<Explanation> {
    let x = result.solution.as_ref()?;
    let soft: Vec<SoftContribution> = set
        .soft()
        .iter()
        .enumerate()
        .map(|(index, rule)| {
            let hits = rule.hits(x);
            SoftContribution {
                index,
                label: rule.origin.label(),
                rationale: rationale(&rule.origin),
                weight: rule.weight,
                hits,
                contribution: rule.weight * hits as f64,
            }
        })
        .collect();
    let hard = check_feasible(set, x)
        .rows
        .into_iter()
        .map(|r| HardStatus {
            binding: r.achieved == r.rhs,
            index: r.index,
            label: r.label,
            achieved: r.achieved,
            sense: r.sense,
            rhs: r.rhs,
            satisfied: r.satisfied,
        })
        .collect();
    let total = soft.iter().map(|s| s.contribution).sum();
    Some(Explanation { soft, hard, total })
}
