use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::{ConstraintKind, SymbolicConstraint};
use crate::grid::Grid;
use crate::solution::SolutionMatrix;
use crate::space::{DesignSpace, ElementRef};

#[derive(Debug, Error, PartialEq)]
pub enum CompileError {
    #[error("constraint {index}: cell {cell} does not resolve in the space")]
    Unresolved { index: usize, cell: ElementRef },
    #[error("constraint {index} is degenerate: {reason}")]
    Degenerate { index: usize, reason: String },
    #[error("constraint {index}: weight {weight} must be finite and non-zero")]
    BadWeight { index: usize, weight: f64 },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix entry ({dimension}, {element}) addresses a padded cell")]
    PaddedEntry { dimension: usize, element: usize },
    #[error("coefficient {value} at ({dimension}, {element}) is outside {{-1, 0, 1}}")]
    Coefficient {
        dimension: usize,
        element: usize,
        value: i8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

impl Sense {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Sense::Eq => lhs == rhs,
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Eq => "=",
            Sense::Le => "<=",
            Sense::Ge => ">=",
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Sense {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

/// Where a compiled row came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum RuleOrigin {
    Constraint {
        index: usize,
        label: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        rationale: Option<String>,
    },
    Cardinality { dimension: String },
    Manual,
}

impl RuleOrigin {
    pub fn label(&self) -> String {
        match self {
            RuleOrigin::Constraint { label, .. } => label.clone(),
            RuleOrigin::Cardinality { dimension } => format!("cardinality({dimension})"),
            RuleOrigin::Manual => "manual".to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftRule {
    pub matrix: Grid<u8>,
    pub weight: f64,
    pub origin: RuleOrigin,
}

impl SoftRule {
    /// `sum_ij S_ij X_ij`
    pub fn hits(&self, x: &SolutionMatrix) -> i64 {
        self.matrix
            .as_slice()
            .iter()
            .zip(x.grid().as_slice())
            .map(|(&s, &v)| i64::from(s & v))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardRow {
    pub matrix: Grid<i8>,
    pub sense: Sense,
    pub rhs: i64,
    pub origin: RuleOrigin,
}

impl HardRow {
    /// `sum_ij H_ij X_ij`
    pub fn lhs(&self, x: &SolutionMatrix) -> i64 {
        self.matrix
            .as_slice()
            .iter()
            .zip(x.grid().as_slice())
            .map(|(&h, &v)| i64::from(h) * i64::from(v))
            .sum()
    }
}

/// Soft matrices with weights and hard rows with sense and right-hand side,
/// all over the padded `n x m` grid of one space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompiledConstraintSet {
    shape: (usize, usize),
    padding: Grid<u8>,
    soft: Vec<SoftRule>,
    hard: Vec<HardRow>,
}

impl CompiledConstraintSet {
    /// An empty set for `space`: no soft rules and no hard rows.
    pub fn empty(space: &DesignSpace) -> Self {
        let (n, m) = space.padded_shape();
        let mut padding = Grid::new(n, m);
        for (i, len) in space.row_lengths().into_iter().enumerate() {
            for j in len..m {
                padding.set(i, j, 1);
            }
        }
        Self {
            shape: (n, m),
            padding,
            soft: Vec::new(),
            hard: Vec::new(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn soft(&self) -> &[SoftRule] {
        &self.soft
    }

    pub fn hard(&self) -> &[HardRow] {
        &self.hard
    }

    pub fn is_padding(&self, dimension: usize, element: usize) -> bool {
        self.padding.get(dimension, element) == 1
    }

    fn check_grid<T: Copy + Default + Into<i64>>(&self, g: &Grid<T>) -> Result<(), CompileError> {
        if g.shape() != self.shape {
            return Err(CompileError::ShapeMismatch {
                expected: self.shape,
                found: g.shape(),
            });
        }
        for (i, j, &v) in g.iter() {
            if v.into() != 0 && self.is_padding(i, j) {
                return Err(CompileError::PaddedEntry {
                    dimension: i,
                    element: j,
                });
            }
        }
        Ok(())
    }

    pub fn push_soft(&mut self, rule: SoftRule) -> Result<(), CompileError> {
        self.check_grid(&rule.matrix)?;
        if !rule.weight.is_finite() {
            return Err(CompileError::BadWeight {
                index: self.soft.len(),
                weight: rule.weight,
            });
        }
        if let Some((i, j, &v)) = rule.matrix.iter().find(|(_, _, &v)| v > 1) {
            return Err(CompileError::Coefficient {
                dimension: i,
                element: j,
                value: v as i8,
            });
        }
        self.soft.push(rule);
        Ok(())
    }

    pub fn push_hard(&mut self, row: HardRow) -> Result<(), CompileError> {
        self.check_grid(&row.matrix)?;
        if let Some((i, j, &v)) = row.matrix.iter().find(|(_, _, &v)| !(-1..=1).contains(&v)) {
            return Err(CompileError::Coefficient {
                dimension: i,
                element: j,
                value: v,
            });
        }
        self.hard.push(row);
        Ok(())
    }

    /// Per-cell objective coefficient `sum_k w_k S^k_ij`, accumulated in rule
    /// order.
    pub fn cell_scores(&self) -> Grid<f64> {
        let (n, m) = self.shape;
        let mut scores = Grid::new(n, m);
        for rule in &self.soft {
            for (i, j, &s) in rule.matrix.iter() {
                if s == 1 {
                    scores.set(i, j, scores.get(i, j) + rule.weight);
                }
            }
        }
        scores
    }

    fn check_shape(&self, x: &SolutionMatrix) -> Result<(), CompileError> {
        if x.shape() != self.shape {
            return Err(CompileError::ShapeMismatch {
                expected: self.shape,
                found: x.shape(),
            });
        }
        Ok(())
    }
}

/// Compiles `constraints` against `space`, then appends one cardinality row
/// (or pair of rows) per dimension.
pub fn compile(
    space: &DesignSpace,
    constraints: &[SymbolicConstraint],
) -> Result<CompiledConstraintSet, CompileError> {
    let mut set = CompiledConstraintSet::empty(space);
    let (n, m) = set.shape;

    for (index, c) in constraints.iter().enumerate() {
        if let Some(cell) = c.kind.cells().into_iter().find(|&r| !space.contains(r)) {
            return Err(CompileError::Unresolved { index, cell });
        }
        let degenerate = |reason: &str| CompileError::Degenerate {
            index,
            reason: reason.to_owned(),
        };
        let origin = RuleOrigin::Constraint {
            index,
            label: c.to_string(),
            rationale: c.rationale.clone(),
        };
        let mark = |cells: &[ElementRef], value: i8, g: &mut Grid<i8>| {
            for r in cells {
                g.set(r.dimension, r.element, value);
            }
        };

        match &c.kind {
            ConstraintKind::PreferEach(cells, w) | ConstraintKind::AvoidEach(cells, w) => {
                if cells.is_empty() {
                    return Err(degenerate("no cells"));
                }
                if *w == 0.0 || !w.is_finite() {
                    return Err(CompileError::BadWeight { index, weight: *w });
                }
                let mut matrix = Grid::new(n, m);
                for r in cells {
                    matrix.set(r.dimension, r.element, 1u8);
                }
                let weight = match c.kind {
                    ConstraintKind::AvoidEach(..) => -w.abs(),
                    _ => w.abs(),
                };
                set.soft.push(SoftRule {
                    matrix,
                    weight,
                    origin,
                });
            }
            kind => {
                let mut matrix = Grid::new(n, m);
                let (sense, rhs) = match kind {
                    ConstraintKind::RequireOneOf(cells) => {
                        if cells.is_empty() {
                            return Err(degenerate("require_one_of over an empty set"));
                        }
                        mark(cells, 1, &mut matrix);
                        (Sense::Eq, 1)
                    }
                    ConstraintKind::Forbid(cells) => {
                        if cells.is_empty() {
                            return Err(degenerate("forbid over an empty set"));
                        }
                        mark(cells, 1, &mut matrix);
                        (Sense::Eq, 0)
                    }
                    ConstraintKind::Together(a, b) => {
                        matrix.set(a.dimension, a.element, 1);
                        let v = matrix.get(b.dimension, b.element);
                        matrix.set(b.dimension, b.element, v - 1);
                        (Sense::Eq, 0)
                    }
                    ConstraintKind::Exclusive(a, b) => {
                        if a == b {
                            return Err(degenerate("exclusive pair names one cell twice"));
                        }
                        matrix.set(a.dimension, a.element, 1);
                        matrix.set(b.dimension, b.element, 1);
                        (Sense::Le, 1)
                    }
                    ConstraintKind::Implies {
                        premises,
                        conclusions,
                    } => {
                        let mut p = premises.clone();
                        p.sort_unstable();
                        p.dedup();
                        let mut q = conclusions.clone();
                        q.sort_unstable();
                        q.dedup();
                        if p.is_empty() && q.is_empty() {
                            return Err(degenerate("implication with no premises and no conclusions"));
                        }
                        mark(&p, 1, &mut matrix);
                        for r in &q {
                            let v = matrix.get(r.dimension, r.element);
                            matrix.set(r.dimension, r.element, v - 1);
                        }
                        (Sense::Le, p.len() as i64 - 1)
                    }
                    ConstraintKind::PreferEach(..) | ConstraintKind::AvoidEach(..) => unreachable!(),
                };
                set.hard.push(HardRow {
                    matrix,
                    sense,
                    rhs,
                    origin,
                });
            }
        }
    }

    for (i, dim) in space.dimensions().iter().enumerate() {
        let mut matrix = Grid::new(n, m);
        for j in 0..dim.len() {
            matrix.set(i, j, 1i8);
        }
        let card = dim.cardinality();
        let origin = RuleOrigin::Cardinality {
            dimension: dim.name().to_owned(),
        };
        let rows: Vec<(Sense, usize)> = if card.min == card.max {
            vec![(Sense::Eq, card.min)]
        } else {
            vec![(Sense::Ge, card.min), (Sense::Le, card.max)]
        };
        for (sense, bound) in rows {
            set.hard.push(HardRow {
                matrix: matrix.clone(),
                sense,
                rhs: bound as i64,
                origin: origin.clone(),
            });
        }
    }
    Ok(set)
}

/// `sum_k w_k sum_ij S^k_ij X_ij`
pub fn objective_value(set: &CompiledConstraintSet, x: &SolutionMatrix) -> Result<f64, CompileError> {
    set.check_shape(x)?;
    Ok(set
        .soft
        .iter()
        .map(|rule| rule.weight * rule.hits(x) as f64)
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowCheck {
    pub index: usize,
    pub label: String,
    pub achieved: i64,
    pub sense: Sense,
    pub rhs: i64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub shape_matches: bool,
    pub padding_clear: bool,
    pub rows: Vec<RowCheck>,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn violations(&self) -> impl Iterator<Item = &RowCheck> + '_ {
        self.rows.iter().filter(|r| !r.satisfied)
    }
}

/// Evaluates every hard row against `x`. Never fails; a shape mismatch is
/// reported as infeasible with no row results.
pub fn check_feasible(set: &CompiledConstraintSet, x: &SolutionMatrix) -> FeasibilityReport {
    if set.check_shape(x).is_err() {
        return FeasibilityReport {
            shape_matches: false,
            padding_clear: false,
            rows: Vec::new(),
            feasible: false,
        };
    }
    let padding_clear = x
        .grid()
        .iter()
        .all(|(i, j, &v)| v == 0 || !set.is_padding(i, j));
    let rows: Vec<RowCheck> = set
        .hard
        .iter()
        .enumerate()
        .map(|(index, row)| {
            let achieved = row.lhs(x);
            RowCheck {
                index,
                label: row.origin.label(),
                achieved,
                sense: row.sense,
                rhs: row.rhs,
                satisfied: row.sense.holds(achieved, row.rhs),
            }
        })
        .collect();
    let feasible = padding_clear && rows.iter().all(|r| r.satisfied);
    FeasibilityReport {
        shape_matches: true,
        padding_clear,
        rows,
        feasible,
    }
}
