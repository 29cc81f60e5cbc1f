//! Symbolic constraints and their compilation into weighted soft matrices and
//! signed hard rows.

mod compile;
mod document;

pub use compile::{
    check_feasible, compile, objective_value, CompileError, CompiledConstraintSet,
    FeasibilityReport, HardRow, RowCheck, RuleOrigin, Sense, SoftRule,
};
pub use document::{
    constraints_from_json, constraints_to_json, ConstraintDocumentError, ConstraintEntry,
};

use std::fmt;

use crate::space::ElementRef;

/// Weight used for `prefer` / `avoid` when none is given.
pub const DEFAULT_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    /// Exactly one of the cells is selected.
    RequireOneOf(Vec<ElementRef>),
    /// None of the cells is selected.
    Forbid(Vec<ElementRef>),
    /// Every selected cell earns `+|weight|`.
    PreferEach(Vec<ElementRef>, f64),
    /// Every selected cell costs `|weight|`.
    AvoidEach(Vec<ElementRef>, f64),
    /// The first cell is selected iff the second is.
    Together(ElementRef, ElementRef),
    /// The two cells are not both selected.
    Exclusive(ElementRef, ElementRef),
    /// If every premise is selected then at least one conclusion is.
    Implies {
        premises: Vec<ElementRef>,
        conclusions: Vec<ElementRef>,
    },
}

impl ConstraintKind {
    pub fn is_soft(&self) -> bool {
        matches!(self, Self::PreferEach(..) | Self::AvoidEach(..))
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            Self::RequireOneOf(_) => "require_one_of",
            Self::Forbid(_) => "forbid",
            Self::PreferEach(..) => "prefer",
            Self::AvoidEach(..) => "avoid",
            Self::Together(..) => "together",
            Self::Exclusive(..) => "exclusive",
            Self::Implies { .. } => "implies",
        }
    }

    /// Position of the kind in the canonical merge order.
    pub fn rank(&self) -> u8 {
        match self {
            Self::RequireOneOf(_) => 0,
            Self::Forbid(_) => 1,
            Self::Together(..) => 2,
            Self::Exclusive(..) => 3,
            Self::Implies { .. } => 4,
            Self::PreferEach(..) => 5,
            Self::AvoidEach(..) => 6,
        }
    }

    /// Every referenced cell, premises before conclusions.
    pub fn cells(&self) -> Vec<ElementRef> {
        match self {
            Self::RequireOneOf(c) | Self::Forbid(c) | Self::PreferEach(c, _) | Self::AvoidEach(c, _) => {
                c.clone()
            }
            Self::Together(a, b) | Self::Exclusive(a, b) => vec![*a, *b],
            Self::Implies {
                premises,
                conclusions,
            } => premises.iter().chain(conclusions).copied().collect(),
        }
    }

    pub fn weight(&self) -> Option<f64> {
        match self {
            Self::PreferEach(_, w) | Self::AvoidEach(_, w) => Some(*w),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicConstraint {
    pub kind: ConstraintKind,
    pub rationale: Option<String>,
}

impl SymbolicConstraint {
    pub fn new(kind: ConstraintKind) -> Self {
        Self {
            kind,
            rationale: None,
        }
    }

    pub fn with_rationale(mut self, rationale: impl Into<String>) -> Self {
        self.rationale = Some(rationale.into());
        self
    }

    pub fn require_one_of(cells: impl Into<Vec<ElementRef>>) -> Self {
        Self::new(ConstraintKind::RequireOneOf(cells.into()))
    }

    pub fn forbid(cells: impl Into<Vec<ElementRef>>) -> Self {
        Self::new(ConstraintKind::Forbid(cells.into()))
    }

    pub fn prefer(cells: impl Into<Vec<ElementRef>>, weight: f64) -> Self {
        Self::new(ConstraintKind::PreferEach(cells.into(), weight))
    }

    pub fn avoid(cells: impl Into<Vec<ElementRef>>, weight: f64) -> Self {
        Self::new(ConstraintKind::AvoidEach(cells.into(), weight))
    }

    pub fn together(a: ElementRef, b: ElementRef) -> Self {
        Self::new(ConstraintKind::Together(a, b))
    }

    pub fn exclusive(a: ElementRef, b: ElementRef) -> Self {
        Self::new(ConstraintKind::Exclusive(a, b))
    }

    pub fn implies(premises: impl Into<Vec<ElementRef>>, conclusions: impl Into<Vec<ElementRef>>) -> Self {
        Self::new(ConstraintKind::Implies {
            premises: premises.into(),
            conclusions: conclusions.into(),
        })
    }

    pub fn is_soft(&self) -> bool {
        self.kind.is_soft()
    }

    /// Sort key for the canonical order: lowest referenced dimension, kind,
    /// then the referenced cells.
    pub fn canonical_key(&self) -> (usize, u8, Vec<ElementRef>) {
        let cells = self.kind.cells();
        let dim = cells.iter().map(|c| c.dimension).min().unwrap_or(usize::MAX);
        (dim, self.kind.rank(), cells)
    }
}

impl fmt::Display for SymbolicConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |cells: &[ElementRef]| {
            cells
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        };
        match &self.kind {
            ConstraintKind::PreferEach(c, w) | ConstraintKind::AvoidEach(c, w) => {
                write!(f, "{}[{}] w={}", self.kind.keyword(), list(c), w)
            }
            ConstraintKind::Implies {
                premises,
                conclusions,
            } => write!(f, "implies[{}] => [{}]", list(premises), list(conclusions)),
            kind => write!(f, "{}[{}]", kind.keyword(), list(&kind.cells())),
        }
    }
}

/// Stable sort into canonical order; duplicates are kept.
pub fn canonicalize(constraints: &mut [SymbolicConstraint]) {
    constraints.sort_by(|a, b| {
        let (ka, kb) = (a.canonical_key(), b.canonical_key());
        ka.partial_cmp(&kb).expect("total order on keys")
    });
}
