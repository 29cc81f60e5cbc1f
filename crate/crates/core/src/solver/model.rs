//! Flattened view of a compiled set over the non-padded cells, shared by both
//! solvers.

use super::SolveError;
use crate::constraint::{CompiledConstraintSet, Sense};
use crate::grid::Grid;
use crate::solution::SolutionMatrix;
use crate::space::{Cardinality, DesignSpace};

pub(super) struct Model {
    pub shape: (usize, usize),
    pub row_len: Vec<usize>,
    /// First flat cell index of each dimension; `row_start[n]` is the total.
    pub row_start: Vec<usize>,
    pub card: Vec<Cardinality>,
    /// Per-cell score, flat row-major over non-padded cells.
    pub score: Vec<f64>,
    /// Per-cell list of (hard row, coefficient) with non-zero coefficient.
    pub touches: Vec<Vec<(usize, i64)>>,
    pub rows: Vec<(Sense, i64)>,
    /// All soft weights are integers, so objective values are exact.
    pub integral: bool,
}

impl Model {
    pub fn new(space: &DesignSpace, set: &CompiledConstraintSet) -> Result<Self, SolveError> {
        let expected = space.padded_shape();
        if set.shape() != expected {
            return Err(SolveError::ShapeMismatch {
                expected,
                found: set.shape(),
            });
        }
        let row_len = space.row_lengths();
        let (n, m) = expected;
        for (i, &len) in row_len.iter().enumerate() {
            for j in 0..m {
                if set.is_padding(i, j) != (j >= len) {
                    return Err(SolveError::PaddingMismatch);
                }
            }
        }
        let mut row_start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for &len in &row_len {
            row_start.push(total);
            total += len;
        }
        row_start.push(total);

        let scores = set.cell_scores();
        let mut score = Vec::with_capacity(total);
        let mut touches = vec![Vec::new(); total];
        for (i, &len) in row_len.iter().enumerate() {
            for j in 0..len {
                score.push(scores.get(i, j));
            }
        }
        for (k, row) in set.hard().iter().enumerate() {
            for (i, j, &h) in row.matrix.iter() {
                if h != 0 {
                    touches[row_start[i] + j].push((k, i64::from(h)));
                }
            }
        }
        Ok(Self {
            shape: expected,
            card: space.dimensions().iter().map(|d| d.cardinality()).collect(),
            row_len,
            row_start,
            score,
            touches,
            rows: set.hard().iter().map(|r| (r.sense, r.rhs)).collect(),
            integral: set.soft().iter().all(|r| r.weight.fract() == 0.0),
        })
    }

    pub fn cells(&self) -> usize {
        self.score.len()
    }

    pub fn dimensions(&self) -> usize {
        self.row_len.len()
    }

    pub fn to_solution(&self, space: &DesignSpace, chosen: impl Fn(usize) -> bool) -> SolutionMatrix {
        let (n, m) = self.shape;
        let mut g = Grid::new(n, m);
        for i in 0..n {
            for j in 0..self.row_len[i] {
                if chosen(self.row_start[i] + j) {
                    g.set(i, j, 1u8);
                }
            }
        }
        SolutionMatrix::from_grid(space, g).expect("model cells are non-padded")
    }
}
