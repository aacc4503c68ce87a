//! Exact solver for the rate-constrained problem.
//!
//! Rates are mapped onto an integer grid of step `quantum` (each rate is
//! rounded up, the budget down) and the cost-to-go
//! `Phi_v(q, b)`, the least distortion of units `v+1..=V` given `v` coded at
//! `q` with `b` grid units left, is memoized over every
//! `(unit, quantizer, residual budget)` state. Runtime and memory are
//! pseudo-polynomial: `O(V^2 Q^2 B / quantum)` time.
//!
//! Rounding rates up never produces an over-budget solution; it may cost
//! optimality by at most the rate slack of one quantum per coded unit.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{RdInstance, Solution};
use crate::scalar::Scalar;

/// Upper bound on memo cells (`V * Q * (B / quantum + 1)`).
pub const MAX_TABLE_CELLS: u128 = 200_000_000;

/// A `(unit, quantizer, residual budget)` sub-problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConstrainedState {
    pub unit: usize,
    pub quantizer: usize,
    pub remaining_budget: u64,
}

#[derive(Debug, Clone, Copy)]
enum Cell<S> {
    Unvisited,
    Infeasible,
    /// Best completion: distortion-to-go, true rate-to-go, next coded state.
    Best {
        dist: S,
        rate: S,
        next: ConstrainedState,
    },
}

struct Dp<'a, S> {
    inst: &'a RdInstance<S>,
    qn: usize,
    width: usize,
    grid_pred: Vec<u64>,
    memo: Vec<Cell<S>>,
}

impl<'a, S: Scalar> Dp<'a, S> {
    fn slot(&self, s: ConstrainedState) -> usize {
        ((s.unit - 1) * self.qn + s.quantizer) * self.width + s.remaining_budget as usize
    }

    fn grid_rate(&self, v: usize, q: usize, w: usize, qw: usize) -> u64 {
        let units = self.inst.unit_count();
        let pair = (w - 1) * (w - 2) / 2 + (v - 1);
        debug_assert!(w <= units);
        self.grid_pred[(pair * self.qn + q) * self.qn + qw]
    }

    /// Coded units and quantizers from `s` through unit V.
    fn suffix(&self, mut s: ConstrainedState) -> (Vec<usize>, Vec<usize>) {
        let last = self.inst.unit_count();
        let mut units = vec![s.unit];
        let mut qs = vec![s.quantizer];
        while s.unit < last {
            match self.memo[self.slot(s)] {
                Cell::Best { next, .. } => s = next,
                _ => break,
            }
            units.push(s.unit);
            qs.push(s.quantizer);
        }
        (units, qs)
    }

    /// Canonical order: distortion, then true rate, then coded units, then
    /// quantizers (lexicographic).
    fn compare(
        &self,
        a: (S, S, ConstrainedState),
        b: (S, S, ConstrainedState),
    ) -> Ordering {
        if !S::ties(a.0, b.0) {
            return a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal);
        }
        if a.1 != b.1 {
            return a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal);
        }
        let (ua, qa) = self.suffix(a.2);
        let (ub, qb) = self.suffix(b.2);
        ua.cmp(&ub).then(qa.cmp(&qb))
    }

    /// Least distortion-to-go and its true rate from state `s`, or `None`
    /// when no completion fits the residual budget.
    fn phi(&mut self, s: ConstrainedState) -> Option<(S, S)> {
        let slot = self.slot(s);
        match self.memo[slot] {
            Cell::Best { dist, rate, .. } => return Some((dist, rate)),
            Cell::Infeasible => return None,
            Cell::Unvisited => {}
        }
        let units = self.inst.unit_count();
        let mut best: Option<(S, S, ConstrainedState)> = None;
        for w in s.unit + 1..=units {
            for qw in 0..self.qn {
                let g = self.grid_rate(s.unit, s.quantizer, w, qw);
                if g > s.remaining_budget {
                    continue;
                }
                let next = ConstrainedState {
                    unit: w,
                    quantizer: qw,
                    remaining_budget: s.remaining_budget - g,
                };
                let (tail_d, tail_r) = if w == units {
                    (S::zero(), S::zero())
                } else {
                    match self.phi(next) {
                        Some(x) => x,
                        None => continue,
                    }
                };
                let cand = (
                    self.inst.delta(s.unit, s.quantizer, w, qw) + tail_d,
                    self.inst.pred_rate(s.unit, s.quantizer, w, qw) + tail_r,
                    next,
                );
                if best.is_none_or(|b| self.compare(cand, b) == Ordering::Less) {
                    best = Some(cand);
                }
            }
        }
        self.memo[slot] = match best {
            Some((dist, rate, next)) => Cell::Best { dist, rate, next },
            None => Cell::Infeasible,
        };
        best.map(|(d, r, _)| (d, r))
    }
}

/// Minimum-distortion solution whose grid-rounded rate fits `budget`.
///
/// Ties are broken by smaller true rate, then lexicographically smallest
/// coded-unit list, then quantizer list. The returned solution reports its
/// true (unrounded) rate.
pub fn solve_constrained<S: Scalar>(
    inst: &RdInstance<S>,
    budget: S,
    quantum: S,
) -> Result<Solution<S>> {
    if !(quantum > S::zero()) || !quantum.is_finite() {
        return Err(Error::InvalidArgument(format!("quantum must be positive, got {quantum}")));
    }
    if !budget.is_finite() {
        return Err(Error::InvalidArgument(format!("budget must be finite, got {budget}")));
    }
    let infeasible = || Error::Infeasible {
        budget: budget.to_f64_lossy(),
        min_rate: inst.min_rate().to_f64_lossy(),
    };
    if budget < S::zero() {
        return Err(infeasible());
    }
    let grid_budget = budget
        .grid_floor(quantum)
        .ok_or_else(|| Error::InvalidArgument("budget does not fit the rate grid".into()))?;
    let units = inst.unit_count();
    let qn = inst.quantizer_count();
    let cells = units as u128 * qn as u128 * (grid_budget as u128 + 1);
    if cells > MAX_TABLE_CELLS {
        return Err(Error::TooLarge {
            count: cells,
            cap: MAX_TABLE_CELLS,
        });
    }

    let grid = |r: S| {
        r.grid_ceil(quantum)
            .ok_or_else(|| Error::InvalidArgument(format!("rate {r} does not fit the rate grid")))
    };
    let mut grid_pred = Vec::with_capacity(units * units * qn * qn / 2);
    for w in 2..=units {
        for v in 1..w {
            for q in 0..qn {
                for qw in 0..qn {
                    grid_pred.push(grid(inst.pred_rate(v, q, w, qw))?);
                }
            }
        }
    }

    let width = grid_budget as usize + 1;
    let mut dp = Dp {
        inst,
        qn,
        width,
        grid_pred,
        memo: vec![Cell::Unvisited; units * qn * width],
    };

    let mut best: Option<(S, S, ConstrainedState)> = None;
    for q in 0..qn {
        let g = grid(inst.intra_rate(q))?;
        if g > grid_budget {
            continue;
        }
        let root = ConstrainedState {
            unit: 1,
            quantizer: q,
            remaining_budget: grid_budget - g,
        };
        let Some((d, r)) = dp.phi(root) else {
            continue;
        };
        let cand = (inst.intra_dist(q) + d, inst.intra_rate(q) + r, root);
        if best.is_none_or(|b| dp.compare(cand, b) == Ordering::Less) {
            best = Some(cand);
        }
    }
    let (_, _, root) = best.ok_or_else(infeasible)?;
    let (coded, qs) = dp.suffix(root);
    Solution::evaluate(inst, coded, qs)
}
