//! Design automation as constrained 0-1 optimization over a structured
//! design space.
//!
//! A [`DesignSpace`](space::DesignSpace) is an ordered list of dimensions,
//! each a finite list of elements. A design is a binary
//! [`SolutionMatrix`](solution::SolutionMatrix) selecting elements per
//! dimension. Requirements become [`SymbolicConstraint`]s (hand-written or
//! produced by the [`llm`] pipeline), which [`compile`](constraint::compile)
//! lowers into weighted soft matrices and signed hard rows. The [`solver`]
//! maximizes the weighted soft score subject to every hard row, and the domain
//! packs ([`vis`], [`knit`]) turn solutions into chart specs and image prompts.

pub mod constraint;
pub mod fixtures;
pub mod grid;
pub mod knit;
pub mod llm;
mod par;
pub mod solution;
pub mod solver;
pub mod space;
pub mod vis;

pub use constraint::{compile, CompiledConstraintSet, ConstraintKind, SymbolicConstraint};
pub use par::Execution;
pub use solution::SolutionMatrix;
pub use solver::{brute_force_solve, solve, SolveResult, SolveStatus};
pub use space::{DesignSpace, ElementName, ElementRef};
