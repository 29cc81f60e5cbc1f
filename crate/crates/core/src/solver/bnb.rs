//! Depth-first branch-and-bound over the non-padded cells in row-major order.
//!
//! Each cell is branched "select" before "skip", so leaves are reached in
//! canonical order and the first leaf with the best value is the canonical
//! optimum. Per-dimension selection counts enforce cardinality directly;
//! every hard row carries its partial sum and the positive and negative
//! coefficient mass still unassigned, which bounds the achievable left-hand
//! side.

use std::time::Instant;

use super::model::Model;
use super::{Method, SolveError, SolveResult, SolveStats, SolverConfig};
use crate::constraint::{CompiledConstraintSet, Sense};
use crate::space::DesignSpace;

struct Search<'a> {
    model: &'a Model,
    dim_of: Vec<usize>,
    /// `rest[c]`: scores of cells `c..` in the same dimension, descending.
    rest: Vec<Vec<f64>>,
    /// `tail[i]`: best achievable score of dimensions `i..` ignoring hard rows.
    tail: Vec<f64>,
    sum: Vec<i64>,
    pos_left: Vec<i64>,
    neg_left: Vec<i64>,
    count: Vec<usize>,
    chosen: Vec<bool>,
    current: f64,
    best: Option<(f64, Vec<bool>)>,
    nodes: u64,
    limit: u64,
}

fn best_completion(sorted: &[f64], need: usize, allow: usize) -> f64 {
    let mut total = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        if k < need || (k < allow && s > 0.0) {
            total += s;
        } else {
            break;
        }
    }
    total
}

impl<'a> Search<'a> {
    fn new(model: &'a Model, limit: u64) -> Self {
        let cells = model.cells();
        let mut dim_of = Vec::with_capacity(cells);
        let mut rest = Vec::with_capacity(cells);
        for i in 0..model.dimensions() {
            let (lo, hi) = (model.row_start[i], model.row_start[i + 1]);
            for c in lo..hi {
                dim_of.push(i);
                let mut v = model.score[c..hi].to_vec();
                v.sort_by(|a, b| b.total_cmp(a));
                rest.push(v);
            }
        }
        let n = model.dimensions();
        let mut tail = vec![0.0; n + 1];
        for i in (0..n).rev() {
            let head = model.row_start[i];
            let own = if model.row_len[i] == 0 {
                0.0
            } else {
                best_completion(&rest[head], model.card[i].min, model.card[i].max)
            };
            tail[i] = own + tail[i + 1];
        }
        let mut pos_left = vec![0; model.rows.len()];
        let mut neg_left = vec![0; model.rows.len()];
        for t in &model.touches {
            for &(k, h) in t {
                if h > 0 {
                    pos_left[k] += h;
                } else {
                    neg_left[k] -= h;
                }
            }
        }
        Self {
            model,
            dim_of,
            rest,
            tail,
            sum: vec![0; model.rows.len()],
            pos_left,
            neg_left,
            count: vec![0; n],
            chosen: vec![false; cells],
            current: 0.0,
            best: None,
            nodes: 0,
            limit,
        }
    }

    fn row_ok(&self, k: usize) -> bool {
        let (sense, rhs) = self.model.rows[k];
        let lo = self.sum[k] - self.neg_left[k];
        let hi = self.sum[k] + self.pos_left[k];
        match sense {
            Sense::Eq => lo <= rhs && rhs <= hi,
            Sense::Le => lo <= rhs,
            Sense::Ge => hi >= rhs,
        }
    }

    fn all_rows_ok(&self) -> bool {
        (0..self.model.rows.len()).all(|k| self.row_ok(k))
    }

    /// Assigns cell `c`, returning whether every touched row stays satisfiable.
    fn assign(&mut self, c: usize, take: bool) -> bool {
        let mut ok = true;
        for &(k, h) in &self.model.touches[c] {
            if h > 0 {
                self.pos_left[k] -= h;
            } else {
                self.neg_left[k] += h;
            }
            if take {
                self.sum[k] += h;
            }
            ok &= self.row_ok(k);
        }
        ok
    }

    fn unassign(&mut self, c: usize, take: bool) {
        for &(k, h) in &self.model.touches[c] {
            if h > 0 {
                self.pos_left[k] += h;
            } else {
                self.neg_left[k] -= h;
            }
            if take {
                self.sum[k] -= h;
            }
        }
    }

    fn pruned(&self, bound: f64) -> bool {
        match &self.best {
            None => false,
            Some((best, _)) if self.model.integral => bound <= *best,
            Some((best, _)) => bound < best - 1e-9 * (1.0 + best.abs()),
        }
    }

    fn dfs(&mut self, c: usize) -> Result<(), SolveError> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(SolveError::ResourceExceeded { limit: self.limit });
        }
        if c == self.model.cells() {
            if self.best.as_ref().is_none_or(|(b, _)| self.current > *b) {
                self.best = Some((self.current, self.chosen.clone()));
            }
            return Ok(());
        }
        let i = self.dim_of[c];
        let card = self.model.card[i];
        let count = self.count[i];
        let bound = self.current
            + best_completion(&self.rest[c], card.min.saturating_sub(count), card.max - count)
            + self.tail[i + 1];
        if self.pruned(bound) {
            return Ok(());
        }
        let left_after = self.model.row_start[i + 1] - c - 1;

        if count < card.max {
            let saved = self.current;
            if self.assign(c, true) {
                self.chosen[c] = true;
                self.count[i] += 1;
                self.current += self.model.score[c];
                let r = self.dfs(c + 1);
                self.current = saved;
                self.count[i] -= 1;
                self.chosen[c] = false;
                r?;
            }
            self.unassign(c, true);
        }
        if count + left_after >= card.min {
            if self.assign(c, false) {
                let r = self.dfs(c + 1);
                r?;
            }
            self.unassign(c, false);
        }
        Ok(())
    }
}

pub(super) fn run(
    space: &DesignSpace,
    set: &CompiledConstraintSet,
    config: SolverConfig,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let model = Model::new(space, set)?;
    let mut search = Search::new(&model, config.node_limit);
    let cards_ok = (0..model.dimensions()).all(|i| model.card[i].min <= model.card[i].max.min(model.row_len[i]));
    if cards_ok && search.all_rows_ok() {
        search.dfs(0)?;
    }
    let solution = search
        .best
        .as_ref()
        .map(|(_, chosen)| model.to_solution(space, |c| chosen[c]));
    let stats = SolveStats {
        nodes: search.nodes,
        elapsed: start.elapsed(),
        method: Method::BranchAndBound,
    };
    Ok(SolveResult::finish(set, solution, stats))
}
