//! Exact maximization of the weighted soft score subject to the hard rows.
//!
//! [`solve`] is a depth-first branch-and-bound; [`brute_force_solve`]
//! enumerates every assignment and serves as the oracle. Both return the same
//! optimum under the same tie-break (see [`SolutionMatrix::canonical_cmp`]).

mod bnb;
mod brute;
mod explain;
mod model;

use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

pub use brute::{brute_force_solve, brute_force_solve_with, BruteForceConfig, DEFAULT_ENUMERATION_CAP};
pub use explain::{explain, Explanation, HardStatus, SoftContribution};

use crate::constraint::{objective_value, CompiledConstraintSet};
use crate::solution::{solution_to_names, SolutionMatrix};
use crate::space::{DesignSpace, ElementName};

pub const DEFAULT_NODE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("constraint set shape {found:?} does not match the space {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("padding of the constraint set does not match the space's dimension sizes")]
    PaddingMismatch,
    #[error("search exceeded the node limit of {limit}")]
    ResourceExceeded { limit: u64 },
    #[error("{count} assignments exceed the enumeration cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BranchAndBound,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    /// Search nodes for branch-and-bound, assignments for enumeration.
    pub nodes: u64,
    pub elapsed: Duration,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub solution: Option<SolutionMatrix>,
    pub objective: Option<f64>,
    pub stats: SolveStats,
}

impl SolveResult {
    fn finish(
        set: &CompiledConstraintSet,
        solution: Option<SolutionMatrix>,
        stats: SolveStats,
    ) -> Self {
        match solution {
            Some(x) => Self {
                status: SolveStatus::Optimal,
                objective: Some(objective_value(set, &x).expect("solution has the set's shape")),
                solution: Some(x),
                stats,
            },
            None => Self {
                status: SolveStatus::Infeasible,
                solution: None,
                objective: None,
                stats,
            },
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Status, objective and solution agree (timing and node counts ignored).
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.status == other.status && self.objective == other.objective && self.solution == other.solution
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub node_limit: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

/// Branch-and-bound with the default node limit.
pub fn solve(space: &DesignSpace, set: &CompiledConstraintSet) -> Result<SolveResult, SolveError> {
    solve_with(space, set, SolverConfig::default())
}

pub fn solve_with(
    space: &DesignSpace,
    set: &CompiledConstraintSet,
    config: SolverConfig,
) -> Result<SolveResult, SolveError> {
    bnb::run(space, set, config)
}

/// Serializable summary of a solve: the chosen tuple by name, the objective,
/// per-rule contributions and node statistics. Elapsed time is left out so
/// that repeated runs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub tuple: Vec<ElementName>,
    pub objective: Option<f64>,
    pub per_rule: Vec<RuleReport>,
    pub stats: ReportStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RuleReport {
    Soft(SoftContribution),
    Hard(HardStatus),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportStats {
    pub nodes: u64,
    pub method: Method,
}

impl SolveReport {
    pub fn new(space: &DesignSpace, set: &CompiledConstraintSet, result: &SolveResult) -> Self {
        let (tuple, per_rule) = match (&result.solution, explain(result, set)) {
            (Some(x), Some(ex)) => {
                let tuple = solution_to_names(space, x).expect("solution belongs to the space");
                let rules = ex
                    .soft
                    .into_iter()
                    .map(RuleReport::Soft)
                    .chain(ex.hard.into_iter().map(RuleReport::Hard))
                    .collect();
                (tuple, rules)
            }
            _ => (Vec::new(), Vec::new()),
        };
        Self {
            status: result.status,
            tuple,
            objective: result.objective,
            per_rule,
            stats: ReportStats {
                nodes: result.stats.nodes,
                method: result.stats.method,
            },
        }
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{check_feasible, compile, SymbolicConstraint};
    use crate::fixtures;
    use crate::solution::solution_to_names;
    use crate::space::{Cardinality, Dimension, ElementRef, MetaInfo};

    #[test]
    fn open_peeps_optimum() {
        let space = fixtures::open_peeps_space();
        let set = compile(&space, &fixtures::open_peeps_constraints()).unwrap();
        let r = solve(&space, &set).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, Some(3.0));
        let x = r.solution.as_ref().unwrap();
        assert!(check_feasible(&set, x).feasible);
        assert_eq!(solution_to_names(&space, x).unwrap(), fixtures::open_peeps_expected_tuple());
        let oracle = brute_force_solve(&space, &set).unwrap();
        assert!(r.same_outcome(&oracle));
        assert_eq!(oracle.stats.nodes, 3125);
    }

    #[test]
    fn no_rules_picks_first_elements() {
        let space = fixtures::open_peeps_space();
        let set = compile(&space, &[]).unwrap();
        let r = solve(&space, &set).unwrap();
        assert_eq!(r.objective, Some(0.0));
        let tuple: Vec<_> = r.solution.unwrap().selected().collect();
        assert_eq!(tuple, (0..5).map(|i| ElementRef::new(i, 0)).collect::<Vec<_>>());
    }

    #[test]
    fn contradiction_is_infeasible() {
        let space = fixtures::open_peeps_space();
        let calm = space.lookup("face", "calm").unwrap();
        let set = compile(
            &space,
            &[SymbolicConstraint::require_one_of(vec![calm]), SymbolicConstraint::forbid(vec![calm])],
        )
        .unwrap();
        let r = solve(&space, &set).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert_eq!(r.objective, None);
        assert!(r.same_outcome(&brute_force_solve(&space, &set).unwrap()));
    }

    #[test]
    fn single_dimension_preference() {
        let dims = vec![Dimension::new("d", ["a", "b", "c", "e"])];
        let space = DesignSpace::new("one", MetaInfo::default(), dims).unwrap();
        let set = compile(&space, &[SymbolicConstraint::prefer(vec![ElementRef::new(0, 2)], 1.0)]).unwrap();
        for r in [solve(&space, &set).unwrap(), brute_force_solve(&space, &set).unwrap()] {
            assert_eq!(r.objective, Some(1.0));
            assert_eq!(r.solution.unwrap().selected().collect::<Vec<_>>(), [ElementRef::new(0, 2)]);
        }
    }

    #[test]
    fn node_limit_is_distinct_from_infeasible() {
        let space = fixtures::open_peeps_space();
        let set = compile(&space, &fixtures::open_peeps_constraints()).unwrap();
        let err = solve_with(&space, &set, SolverConfig { node_limit: 3 }).unwrap_err();
        assert_eq!(err, SolveError::ResourceExceeded { limit: 3 });
    }

    #[test]
    fn shape_mismatch_rejected() {
        let space = fixtures::open_peeps_space();
        let other = DesignSpace::new("t", MetaInfo::default(), vec![Dimension::new("a", ["x"])]).unwrap();
        let set = compile(&other, &[]).unwrap();
        assert!(matches!(solve(&space, &set), Err(SolveError::ShapeMismatch { .. })));
        assert!(matches!(brute_force_solve(&space, &set), Err(SolveError::ShapeMismatch { .. })));
    }

    #[test]
    fn cardinality_ranges() {
        let dims = vec![
            Dimension::new("a", ["p", "q", "r"]).with_cardinality(Cardinality::new(0, 2)),
            Dimension::new("b", ["s", "t"]).with_cardinality(Cardinality::new(1, 2)),
        ];
        let space = DesignSpace::new("t", MetaInfo::default(), dims).unwrap();
        let cs = vec![
            SymbolicConstraint::prefer(vec![ElementRef::new(0, 0), ElementRef::new(0, 2)], 2.0),
            SymbolicConstraint::prefer(vec![ElementRef::new(0, 1)], 1.0),
            SymbolicConstraint::avoid(vec![ElementRef::new(1, 0), ElementRef::new(1, 1)], 1.0),
        ];
        let set = compile(&space, &cs).unwrap();
        let r = solve(&space, &set).unwrap();
        assert!(r.same_outcome(&brute_force_solve(&space, &set).unwrap()));
        assert_eq!(r.objective, Some(3.0));
        assert_eq!(
            r.solution.unwrap().to_rows(),
            vec![vec![1, 0, 1], vec![1, 0, 0]]
        );
    }

    #[test]
    fn report_serializes_without_timing() {
        let space = fixtures::open_peeps_space();
        let set = compile(&space, &fixtures::open_peeps_constraints()).unwrap();
        let r = solve(&space, &set).unwrap();
        let json = SolveReport::new(&space, &set, &r).to_json_pretty();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["status"], "optimal");
        assert_eq!(v["objective"], 3.0);
        assert_eq!(v["tuple"][4]["element"], "sporty tee");
        assert_eq!(v["stats"]["method"], "branch_and_bound");
        assert!(v["stats"].get("elapsed").is_none());
        assert_eq!(json, SolveReport::new(&space, &set, &solve(&space, &set).unwrap()).to_json_pretty());
    }
}
