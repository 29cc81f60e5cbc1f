//! Random instances and an independent evaluator of constraint semantics,
//! shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use cods_core::space::{Cardinality, Dimension, MetaInfo};
use cods_core::{ConstraintKind, DesignSpace, ElementRef, SolutionMatrix, SymbolicConstraint};
use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};

pub const WEIGHTS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

/// Up to `max_n` dimensions of up to `max_m` elements. About one dimension
/// in five gets a cardinality range other than exactly one. Spaces with more
/// than `max_assignments` assignments are redrawn.
pub fn random_space(rng: &mut impl RngCore, max_n: usize, max_m: usize, max_assignments: u128) -> DesignSpace {
    loop {
        let n = rng.random_range(1..=max_n);
        let dims: Vec<Dimension> = (0..n)
            .map(|i| {
                let len = rng.random_range(1..=max_m);
                let d = Dimension::new(format!("d{i}"), (0..len).map(|j| format!("e{i}_{j}")));
                if rng.random_bool(0.2) {
                    let min = rng.random_range(0..=1usize.min(len));
                    let max = rng.random_range(min.max(1)..=len.min(2));
                    d.with_cardinality(Cardinality::new(min, max))
                } else {
                    d
                }
            })
            .collect();
        let space = DesignSpace::new("random", MetaInfo::default(), dims).expect("generated space is valid");
        if space.selection_count() <= max_assignments {
            return space;
        }
    }
}

pub fn random_cell(rng: &mut impl RngCore, space: &DesignSpace) -> ElementRef {
    let i = rng.random_range(0..space.dimensions().len());
    ElementRef::new(i, rng.random_range(0..space.dimensions()[i].len()))
}

fn random_cells(rng: &mut impl RngCore, space: &DesignSpace, lo: usize, hi: usize) -> Vec<ElementRef> {
    let k = rng.random_range(lo..=hi);
    (0..k).map(|_| random_cell(rng, space)).collect()
}

pub fn random_hard(rng: &mut impl RngCore, space: &DesignSpace) -> SymbolicConstraint {
    match rng.random_range(0..5) {
        0 => SymbolicConstraint::require_one_of(random_cells(rng, space, 1, 3)),
        1 => SymbolicConstraint::forbid(random_cells(rng, space, 1, 2)),
        2 => SymbolicConstraint::together(random_cell(rng, space), random_cell(rng, space)),
        3 if space.dimensions().iter().map(Dimension::len).sum::<usize>() >= 2 => loop {
            let (a, b) = (random_cell(rng, space), random_cell(rng, space));
            if a != b {
                break SymbolicConstraint::exclusive(a, b);
            }
        },
        3 => SymbolicConstraint::forbid(vec![random_cell(rng, space)]),
        _ => {
            let p = random_cells(rng, space, 0, 2);
            let lo = usize::from(p.is_empty());
            let q = random_cells(rng, space, lo, 2);
            SymbolicConstraint::implies(p, q)
        }
    }
}

pub fn random_soft(rng: &mut impl RngCore, space: &DesignSpace) -> SymbolicConstraint {
    let cells = random_cells(rng, space, 1, 3);
    let w = *WEIGHTS.choose(rng).unwrap();
    if w > 0.0 {
        SymbolicConstraint::prefer(cells, w)
    } else {
        SymbolicConstraint::avoid(cells, -w)
    }
}

/// A space with up to eight hard and up to eight soft constraints.
pub fn random_instance(rng: &mut impl RngCore) -> (DesignSpace, Vec<SymbolicConstraint>) {
    let space = random_space(rng, 6, 6, 200_000);
    let hard = rng.random_range(0..=8);
    let soft = rng.random_range(0..=8);
    let mut cs: Vec<SymbolicConstraint> = (0..hard).map(|_| random_hard(rng, &space)).collect();
    cs.extend((0..soft).map(|_| random_soft(rng, &space)));
    (space, cs)
}

/// A matrix respecting every dimension's cardinality.
pub fn random_solution(rng: &mut impl RngCore, space: &DesignSpace) -> SolutionMatrix {
    let mut refs = Vec::new();
    for (i, d) in space.dimensions().iter().enumerate() {
        let c = d.cardinality();
        let k = rng.random_range(c.min..=c.max.min(d.len()));
        let mut idx: Vec<usize> = (0..d.len()).collect();
        for t in 0..k {
            let s = rng.random_range(t..idx.len());
            idx.swap(t, s);
        }
        refs.extend(idx[..k].iter().map(|&j| ElementRef::new(i, j)));
    }
    SolutionMatrix::from_refs(space, &refs).expect("refs lie in the space")
}

/// Any 0-1 matrix over the space's cells, cardinality ignored.
pub fn random_matrix(rng: &mut impl RngCore, space: &DesignSpace) -> SolutionMatrix {
    let rows: Vec<Vec<u8>> = space
        .dimensions()
        .iter()
        .map(|d| (0..d.len()).map(|_| u8::from(rng.random_bool(0.35))).collect())
        .collect();
    let (_, m) = space.padded_shape();
    let padded: Vec<Vec<u8>> = rows
        .into_iter()
        .map(|mut r| {
            r.resize(m, 0);
            r
        })
        .collect();
    SolutionMatrix::from_rows(space, &padded).expect("rows fit the space")
}

pub fn cardinality_ok(space: &DesignSpace, x: &SolutionMatrix) -> bool {
    space
        .dimensions()
        .iter()
        .enumerate()
        .all(|(i, d)| d.cardinality().contains((0..d.len()).filter(|&j| x.get(i, j) == 1).count()))
}

fn distinct(cells: &[ElementRef]) -> BTreeSet<ElementRef> {
    cells.iter().copied().collect()
}

fn count(x: &SolutionMatrix, cells: &BTreeSet<ElementRef>) -> usize {
    cells.iter().filter(|&&r| x.is_selected(r)).count()
}

/// Whether `x` satisfies the hard constraint `c`, read directly from its
/// meaning rather than from any compiled row.
pub fn holds(c: &SymbolicConstraint, x: &SolutionMatrix) -> bool {
    match &c.kind {
        ConstraintKind::RequireOneOf(cells) => count(x, &distinct(cells)) == 1,
        ConstraintKind::Forbid(cells) => count(x, &distinct(cells)) == 0,
        ConstraintKind::Together(a, b) => x.is_selected(*a) == x.is_selected(*b),
        ConstraintKind::Exclusive(a, b) => !(x.is_selected(*a) && x.is_selected(*b)),
        ConstraintKind::Implies {
            premises,
            conclusions,
        } => !premises.iter().all(|&p| x.is_selected(p)) || conclusions.iter().any(|&q| x.is_selected(q)),
        ConstraintKind::PreferEach(..) | ConstraintKind::AvoidEach(..) => true,
    }
}

/// The score `c` awards `x`: the signed weight per selected distinct cell.
pub fn score(c: &SymbolicConstraint, x: &SolutionMatrix) -> f64 {
    match &c.kind {
        ConstraintKind::PreferEach(cells, w) => w.abs() * count(x, &distinct(cells)) as f64,
        ConstraintKind::AvoidEach(cells, w) => -w.abs() * count(x, &distinct(cells)) as f64,
        _ => 0.0,
    }
}

/// Exhaustive optimum over every matrix that respects cardinality, written
/// against the symbolic semantics only: returns the best score and the
/// first matrix reaching it under the row-major "selected cell first"
/// order, or `None` when nothing is feasible.
pub fn symbolic_optimum(space: &DesignSpace, cs: &[SymbolicConstraint]) -> Option<(f64, SolutionMatrix)> {
    let cells: Vec<ElementRef> = space
        .dimensions()
        .iter()
        .enumerate()
        .flat_map(|(i, d)| (0..d.len()).map(move |j| ElementRef::new(i, j)))
        .collect();
    assert!(cells.len() <= 20, "symbolic oracle limited to 20 cells");
    let mut best: Option<(f64, SolutionMatrix)> = None;
    // Counting down visits subsets in canonical order: the first cell
    // selected before unselected, then the second, and so on.
    for mask in (0u32..(1 << cells.len())).rev() {
        let refs: Vec<ElementRef> = cells
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << (cells.len() - 1 - k)) != 0)
            .map(|(_, r)| *r)
            .collect();
        let x = SolutionMatrix::from_refs(space, &refs).expect("refs lie in the space");
        if !cardinality_ok(space, &x) || !cs.iter().all(|c| holds(c, &x)) {
            continue;
        }
        let v: f64 = cs.iter().map(|c| score(c, &x)).sum();
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, x));
        }
    }
    best
}
