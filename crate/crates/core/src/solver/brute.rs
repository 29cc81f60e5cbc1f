//! Exhaustive enumeration oracle.
//!
//! Assignments are the mixed-radix product of per-dimension subset choices
//! (dimension 0 most significant, each dimension's subsets in canonical
//! order), so assignment index order is the canonical solution order and the
//! lowest index among equal values is the canonical optimum.

use std::time::Instant;

use super::model::Model;
use super::{Method, SolveError, SolveResult, SolveStats};
use crate::constraint::CompiledConstraintSet;
use crate::par::Execution;
use crate::space::{Cardinality, DesignSpace};

pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceConfig {
    pub cap: u128,
    pub execution: Execution,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
            execution: Execution::default(),
        }
    }
}

/// Subsets of `0..len` with size in `card`, "select" before "skip" at each
/// element, as ascending index lists.
fn subsets(len: usize, card: Cardinality) -> Vec<Vec<usize>> {
    fn go(j: usize, len: usize, card: Cardinality, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if j == len {
            if card.contains(cur.len()) {
                out.push(cur.clone());
            }
            return;
        }
        if cur.len() < card.max {
            cur.push(j);
            go(j + 1, len, card, cur, out);
            cur.pop();
        }
        if cur.len() + (len - j - 1) >= card.min {
            go(j + 1, len, card, cur, out);
        }
    }
    let mut out = Vec::new();
    go(0, len, card, &mut Vec::new(), &mut out);
    out
}

struct Enumeration<'a> {
    model: &'a Model,
    /// Per dimension, per option: flat cell indices.
    options: Vec<Vec<Vec<usize>>>,
}

impl Enumeration<'_> {
    fn digits(&self, mut index: u64) -> Vec<usize> {
        let mut d = vec![0; self.options.len()];
        for i in (0..self.options.len()).rev() {
            let radix = self.options[i].len() as u64;
            d[i] = (index % radix) as usize;
            index /= radix;
        }
        d
    }

    fn advance(&self, digits: &mut [usize]) {
        for i in (0..digits.len()).rev() {
            digits[i] += 1;
            if digits[i] < self.options[i].len() {
                return;
            }
            digits[i] = 0;
        }
    }

    fn evaluate(&self, digits: &[usize], sums: &mut [i64]) -> Option<f64> {
        sums.iter_mut().for_each(|s| *s = 0);
        let mut value = 0.0;
        for (i, &d) in digits.iter().enumerate() {
            for &c in &self.options[i][d] {
                value += self.model.score[c];
                for &(k, h) in &self.model.touches[c] {
                    sums[k] += h;
                }
            }
        }
        let feasible = self
            .model
            .rows
            .iter()
            .zip(sums.iter())
            .all(|(&(sense, rhs), &s)| sense.holds(s, rhs));
        feasible.then_some(value)
    }

    fn best_in(&self, lo: u64, hi: u64) -> Option<(f64, u64)> {
        if lo >= hi {
            return None;
        }
        let mut digits = self.digits(lo);
        let mut sums = vec![0; self.model.rows.len()];
        let mut best: Option<(f64, u64)> = None;
        for idx in lo..hi {
            if let Some(v) = self.evaluate(&digits, &mut sums) {
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, idx));
                }
            }
            self.advance(&mut digits);
        }
        best
    }
}

fn better(a: Option<(f64, u64)>, b: Option<(f64, u64)>) -> Option<(f64, u64)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Enumeration with the default cap and execution policy.
pub fn brute_force_solve(space: &DesignSpace, set: &CompiledConstraintSet) -> Result<SolveResult, SolveError> {
    brute_force_solve_with(space, set, BruteForceConfig::default())
}

pub fn brute_force_solve_with(
    space: &DesignSpace,
    set: &CompiledConstraintSet,
    config: BruteForceConfig,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let model = Model::new(space, set)?;
    let count: u128 = model
        .card
        .iter()
        .zip(&model.row_len)
        .map(|(&c, &len)| crate::space::subsets_in_range(len, c))
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX);
    if count > config.cap {
        return Err(SolveError::CapExceeded { count, cap: config.cap });
    }
    let options = (0..model.dimensions())
        .map(|i| {
            subsets(model.row_len[i], model.card[i])
                .into_iter()
                .map(|s| s.into_iter().map(|j| model.row_start[i] + j).collect())
                .collect()
        })
        .collect();
    let en = Enumeration { model: &model, options };
    let total = count as u64;
    let best = config
        .execution
        .map_reduce_range(total, CHUNK, None, |lo, hi| en.best_in(lo, hi), better);
    let solution = best.map(|(_, idx)| {
        let digits = en.digits(idx);
        let mut chosen = vec![false; model.cells()];
        for (i, &d) in digits.iter().enumerate() {
            for &c in &en.options[i][d] {
                chosen[c] = true;
            }
        }
        model.to_solution(space, |c| chosen[c])
    });
    let stats = SolveStats {
        nodes: total,
        elapsed: start.elapsed(),
        method: Method::BruteForce,
    };
    Ok(SolveResult::finish(set, solution, stats))
}
