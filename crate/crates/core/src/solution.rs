//! Binary selection matrices over a design space and their tuple form.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::grid::Grid;
use crate::space::{DesignSpace, ElementName, ElementRef, SpaceError};

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error("shape mismatch: matrix is {found:?}, space is {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("cell ({dimension}, {element}) is padding and cannot be selected")]
    PaddedCell { dimension: usize, element: usize },
    #[error("matrix entry ({dimension}, {element}) is {value}, expected 0 or 1")]
    NotBinary {
        dimension: usize,
        element: usize,
        value: u8,
    },
    #[error("unresolved element reference: {0}")]
    Unresolved(#[from] SpaceError),
    #[error("element {0} is referenced more than once")]
    Duplicate(ElementName),
}

/// `X in {0,1}^{n x m}`; cells at or beyond a dimension's element count are
/// padding and always 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct SolutionMatrix {
    cells: Grid<u8>,
    #[serde(skip)]
    row_lengths: Vec<usize>,
}

impl SolutionMatrix {
    pub fn zeros(space: &DesignSpace) -> Self {
        let (n, m) = space.padded_shape();
        Self {
            cells: Grid::new(n, m),
            row_lengths: space.row_lengths(),
        }
    }

    /// Validates nested 0/1 rows against the shape and padding of `space`.
    pub fn from_rows(space: &DesignSpace, rows: &[Vec<u8>]) -> Result<Self, SolutionError> {
        let expected = space.padded_shape();
        let cells = Grid::from_rows(rows).ok_or(SolutionError::ShapeMismatch {
            expected,
            found: (rows.len(), 0),
        })?;
        Self::from_grid(space, cells)
    }

    pub fn from_grid(space: &DesignSpace, cells: Grid<u8>) -> Result<Self, SolutionError> {
        let expected = space.padded_shape();
        if cells.shape() != expected {
            return Err(SolutionError::ShapeMismatch {
                expected,
                found: cells.shape(),
            });
        }
        let row_lengths = space.row_lengths();
        for (i, j, &v) in cells.iter() {
            if v > 1 {
                return Err(SolutionError::NotBinary {
                    dimension: i,
                    element: j,
                    value: v,
                });
            }
            if v == 1 && j >= row_lengths[i] {
                return Err(SolutionError::PaddedCell {
                    dimension: i,
                    element: j,
                });
            }
        }
        Ok(Self { cells, row_lengths })
    }

    /// Exactly the given cells set to 1.
    pub fn from_refs(space: &DesignSpace, refs: &[ElementRef]) -> Result<Self, SolutionError> {
        let mut x = Self::zeros(space);
        for &r in refs {
            space.check_ref(r)?;
            if x.is_selected(r) {
                return Err(SolutionError::Duplicate(space.name_of(r)?));
            }
            x.cells.set(r.dimension, r.element, 1);
        }
        Ok(x)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.cells.shape()
    }

    pub fn row_lengths(&self) -> &[usize] {
        &self.row_lengths
    }

    pub fn is_padding(&self, dimension: usize, element: usize) -> bool {
        element >= self.row_lengths[dimension]
    }

    pub fn get(&self, dimension: usize, element: usize) -> u8 {
        self.cells.get(dimension, element)
    }

    pub fn is_selected(&self, r: ElementRef) -> bool {
        self.cells.get(r.dimension, r.element) == 1
    }

    pub fn grid(&self) -> &Grid<u8> {
        &self.cells
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.cells.to_rows()
    }

    /// Selected cells in dimension-major, element-index order.
    pub fn selected(&self) -> impl Iterator<Item = ElementRef> + '_ {
        self.cells
            .iter()
            .filter(|(_, _, &v)| v == 1)
            .map(|(i, j, _)| ElementRef::new(i, j))
    }

    pub fn row_count(&self, dimension: usize) -> usize {
        (0..self.row_lengths[dimension])
            .filter(|&j| self.cells.get(dimension, j) == 1)
            .count()
    }

    /// True when every dimension's selection count lies in its cardinality.
    pub fn satisfies_cardinality(&self, space: &DesignSpace) -> bool {
        space
            .dimensions()
            .iter()
            .enumerate()
            .all(|(i, d)| d.cardinality().contains(self.row_count(i)))
    }

    /// The tie-break order: compare cells row-major; at the first difference
    /// the matrix that selects the cell ranks first. For one-per-dimension
    /// solutions this is lexicographic order on the element-index tuple.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.cells.as_slice().iter().zip(other.cells.as_slice()) {
            match b.cmp(a) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

/// Selected cells of `x`, dimension-major, as index references.
pub fn solution_to_tuple(
    space: &DesignSpace,
    x: &SolutionMatrix,
) -> Result<Vec<ElementRef>, SolutionError> {
    let expected = space.padded_shape();
    if x.shape() != expected || x.row_lengths() != space.row_lengths().as_slice() {
        return Err(SolutionError::ShapeMismatch {
            expected,
            found: x.shape(),
        });
    }
    if let Some((i, j, _)) = x
        .cells
        .iter()
        .find(|&(i, j, &v)| v == 1 && x.is_padding(i, j))
    {
        return Err(SolutionError::PaddedCell {
            dimension: i,
            element: j,
        });
    }
    Ok(x.selected().collect())
}

/// Selected cells of `x` by name.
pub fn solution_to_names(
    space: &DesignSpace,
    x: &SolutionMatrix,
) -> Result<Vec<ElementName>, SolutionError> {
    solution_to_tuple(space, x)?
        .into_iter()
        .map(|r| space.name_of(r).map_err(SolutionError::from))
        .collect()
}

/// Builds the matrix with exactly the named cells selected.
pub fn tuple_to_solution(
    space: &DesignSpace,
    refs: &[ElementName],
) -> Result<SolutionMatrix, SolutionError> {
    let mut resolved = Vec::with_capacity(refs.len());
    for name in refs {
        resolved.push(space.resolve(name)?);
    }
    SolutionMatrix::from_refs(space, &resolved)
}
