//! Fixed-multiplier solver for `min D + lambda * R`.
//!
//! Every state `(v, q)` (unit `v` coded at quantizer `q`) keeps two
//! optimal branches. Both minimize the Lagrangian cost-to-go; they differ
//! only in how cost ties are resolved:
//!
//! * the *low* branch prefers the smaller rate-to-go, then the smaller next
//!   unit, then the smaller next quantizer. It is the optimum on
//!   `[lambda, lambda + eps)`.
//! * the *high* branch prefers the larger rate-to-go, then the earliest
//!   successor. It is the optimum on `(lambda - eps, lambda]`.
//!
//! At a non-singular multiplier the two coincide. Each branch stores its
//! distortion-to-go `psi` and rate-to-go `upsilon`; the cost-to-go `phi` is
//! always `psi + lambda * upsilon`.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{RdInstance, Solution};
use crate::scalar::Scalar;

/// Which tie resolution to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Branch<S> {
    pub(crate) psi: S,
    pub(crate) ups: S,
    /// `(unit, quantizer)` of the next coded unit; `None` at unit V.
    pub(crate) next: Option<(usize, usize)>,
}

impl<S: Scalar> Branch<S> {
    fn terminal() -> Self {
        Self {
            psi: S::zero(),
            ups: S::zero(),
            next: None,
        }
    }

    fn identical(&self, other: &Self) -> bool {
        self.psi.identical(other.psi) && self.ups.identical(other.ups) && self.next == other.next
    }
}

/// Cost-to-go tables of one multiplier.
#[derive(Debug)]
pub struct LagrangeTables<S> {
    lambda: S,
    units: usize,
    qn: usize,
    pub(crate) low: Vec<Branch<S>>,
    pub(crate) high: Vec<Branch<S>>,
    pub(crate) root_low: Branch<S>,
    pub(crate) root_high: Branch<S>,
    evaluations: AtomicU64,
}

impl<S: Clone> Clone for LagrangeTables<S> {
    fn clone(&self) -> Self {
        Self {
            lambda: self.lambda.clone(),
            units: self.units,
            qn: self.qn,
            low: self.low.clone(),
            high: self.high.clone(),
            root_low: self.root_low.clone(),
            root_high: self.root_high.clone(),
            evaluations: AtomicU64::new(self.evaluations.load(Ordering::Relaxed)),
        }
    }
}

impl<S: Scalar> LagrangeTables<S> {
    fn empty(inst: &RdInstance<S>, lambda: S) -> Self {
        let (units, qn) = (inst.unit_count(), inst.quantizer_count());
        Self {
            lambda,
            units,
            qn,
            low: vec![Branch::terminal(); units * qn],
            high: vec![Branch::terminal(); units * qn],
            root_low: Branch::terminal(),
            root_high: Branch::terminal(),
            evaluations: AtomicU64::new(0),
        }
    }

    #[inline]
    pub(crate) fn idx(&self, v: usize, q: usize) -> usize {
        (v - 1) * self.qn + q
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    pub fn unit_count(&self) -> usize {
        self.units
    }

    pub fn quantizer_count(&self) -> usize {
        self.qn
    }

    pub(crate) fn branch(&self, side: Side, v: usize, q: usize) -> &Branch<S> {
        let i = self.idx(v, q);
        match side {
            Side::Low => &self.low[i],
            Side::High => &self.high[i],
        }
    }

    pub(crate) fn root(&self, side: Side) -> &Branch<S> {
        match side {
            Side::Low => &self.root_low,
            Side::High => &self.root_high,
        }
    }

    /// Cost-to-go `phi = psi + lambda * upsilon` of the low branch.
    pub fn phi(&self, v: usize, q: usize) -> S {
        self.phi_on(Side::Low, v, q)
    }

    pub fn phi_on(&self, side: Side, v: usize, q: usize) -> S {
        let b = self.branch(side, v, q);
        b.psi + self.lambda * b.ups
    }

    pub fn psi(&self, v: usize, q: usize) -> S {
        self.branch(Side::Low, v, q).psi
    }

    pub fn upsilon(&self, v: usize, q: usize) -> S {
        self.branch(Side::Low, v, q).ups
    }

    pub fn psi_on(&self, side: Side, v: usize, q: usize) -> S {
        self.branch(side, v, q).psi
    }

    pub fn upsilon_on(&self, side: Side, v: usize, q: usize) -> S {
        self.branch(side, v, q).ups
    }

    /// Successor chosen by the low branch; `None` at unit V.
    pub fn best_next(&self, v: usize, q: usize) -> Option<(usize, usize)> {
        self.branch(Side::Low, v, q).next
    }

    /// Successor chosen by the high branch when it differs from
    /// [`LagrangeTables::best_next`].
    pub fn tie_alt(&self, v: usize, q: usize) -> Option<(usize, usize)> {
        let i = self.idx(v, q);
        (self.high[i].next != self.low[i].next).then_some(self.high[i].next).flatten()
    }

    /// Least Lagrangian cost of a complete solution.
    pub fn root_cost(&self) -> S {
        self.root_low.psi + self.lambda * self.root_low.ups
    }

    /// Initial quantizer chosen on `side`.
    pub fn root_quantizer(&self, side: Side) -> usize {
        self.root(side).next.map_or(0, |(_, q)| q)
    }

    /// Candidate successor evaluations performed on these tables so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub(crate) fn count(&self, n: u64) {
        self.evaluations.fetch_add(n, Ordering::Relaxed);
    }

    pub(crate) fn set_lambda(&mut self, lambda: S) {
        self.lambda = lambda;
    }

    /// Recomputes both branches of every state at unit `v`.
    pub(crate) fn relax_unit(&mut self, inst: &RdInstance<S>, v: usize) {
        let (units, qn, lambda) = (self.units, self.qn, self.lambda);
        for q in 0..qn {
            let mut low: Option<(S, Branch<S>)> = None;
            let mut high: Option<(S, Branch<S>)> = None;
            for w in v + 1..=units {
                for qw in 0..qn {
                    let d = inst.delta(v, q, w, qw);
                    let r = inst.pred_rate(v, q, w, qw);
                    let j = self.idx(w, qw);
                    offer(&mut low, extend(&self.low[j], d, r, (w, qw)), lambda, Side::Low);
                    offer(&mut high, extend(&self.high[j], d, r, (w, qw)), lambda, Side::High);
                }
            }
            self.count(((units - v) * qn) as u64);
            let i = self.idx(v, q);
            self.low[i] = low.map_or_else(Branch::terminal, |x| x.1);
            self.high[i] = high.map_or_else(Branch::terminal, |x| x.1);
        }
    }

    pub(crate) fn relax_root(&mut self, inst: &RdInstance<S>) {
        let lambda = self.lambda;
        let mut low: Option<(S, Branch<S>)> = None;
        let mut high: Option<(S, Branch<S>)> = None;
        for q in 0..self.qn {
            let (d, r) = (inst.intra_dist(q), inst.intra_rate(q));
            let j = self.idx(1, q);
            offer(&mut low, extend(&self.low[j], d, r, (1, q)), lambda, Side::Low);
            offer(&mut high, extend(&self.high[j], d, r, (1, q)), lambda, Side::High);
        }
        self.count(self.qn as u64);
        self.root_low = low.map_or_else(Branch::terminal, |x| x.1);
        self.root_high = high.map_or_else(Branch::terminal, |x| x.1);
    }

    pub(crate) fn copy_branch(&mut self, from: Side, above_unit: usize) {
        let start = above_unit * self.qn;
        let (src, dst) = match from {
            Side::Low => (&self.low, &mut self.high),
            Side::High => (&self.high, &mut self.low),
        };
        dst[start..].copy_from_slice(&src[start..]);
    }

    /// Coded units and quantizers along one branch.
    pub fn path(&self, side: Side) -> (Vec<usize>, Vec<usize>) {
        let mut units = Vec::new();
        let mut qs = Vec::new();
        let mut cur = self.root(side).next;
        while let Some((v, q)) = cur {
            units.push(v);
            qs.push(q);
            cur = self.branch(side, v, q).next;
        }
        (units, qs)
    }

    /// First entry where two tables of the same instance differ bitwise.
    pub fn diff(&self, other: &Self) -> Option<String> {
        if !self.lambda.identical(other.lambda) {
            return Some(format!("lambda {} vs {}", self.lambda, other.lambda));
        }
        if self.low.len() != other.low.len() {
            return Some("table shapes differ".into());
        }
        let roots = [
            ("root/low", &self.root_low, &other.root_low),
            ("root/high", &self.root_high, &other.root_high),
        ];
        for (name, a, b) in roots {
            if !a.identical(b) {
                return Some(format!("{name}: {a:?} vs {b:?}"));
            }
        }
        for i in 0..self.low.len() {
            let (v, q) = (i / self.qn + 1, i % self.qn);
            for (name, a, b) in [("low", &self.low[i], &other.low[i]), ("high", &self.high[i], &other.high[i])] {
                if !a.identical(b) {
                    return Some(format!("state ({v}, {q}) {name}: {a:?} vs {b:?}"));
                }
            }
        }
        None
    }
}

fn extend<S: Scalar>(succ: &Branch<S>, d: S, r: S, next: (usize, usize)) -> Branch<S> {
    Branch {
        psi: d + succ.psi,
        ups: r + succ.ups,
        next: Some(next),
    }
}

/// Keeps `cand` if it beats `best` under the tie rule of `side`. Candidates
/// arrive in ascending successor order, so the earlier one wins full ties.
#[inline]
fn offer<S: Scalar>(best: &mut Option<(S, Branch<S>)>, cand: Branch<S>, lambda: S, side: Side) {
    let cost = cand.psi + lambda * cand.ups;
    let better = match best {
        None => true,
        Some((bc, b)) => {
            if S::ties(cost, *bc) {
                match side {
                    Side::Low => cand.ups < b.ups,
                    Side::High => cand.ups > b.ups,
                }
            } else {
                cost < *bc
            }
        }
    };
    if better {
        *best = Some((cost, cand));
    }
}

fn check_lambda<S: Scalar>(lambda: S) -> Result<()> {
    if lambda < S::zero() || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "multiplier must be finite and non-negative, got {lambda}"
        )));
    }
    Ok(())
}

/// Fills both branches of every state in one backward pass, without
/// reconstructing a solution.
pub fn solve_tables<S: Scalar>(inst: &RdInstance<S>, lambda: S) -> Result<LagrangeTables<S>> {
    check_lambda(lambda)?;
    let mut t = LagrangeTables::empty(inst, lambda);
    for v in (1..inst.unit_count()).rev() {
        t.relax_unit(inst, v);
    }
    t.relax_root(inst);
    Ok(t)
}

/// Minimizes `D + lambda * R`. The returned solution follows the low branch,
/// so at a singular multiplier it is the smaller-rate optimum.
pub fn solve_lagrangian<S: Scalar>(
    inst: &RdInstance<S>,
    lambda: S,
) -> Result<(LagrangeTables<S>, Solution<S>)> {
    let t = solve_tables(inst, lambda)?;
    let (units, qs) = t.path(Side::Low);
    let sol = Solution::evaluate(inst, units, qs)?;
    Ok((t, sol))
}

/// The smallest-rate and largest-rate optima at the tables' multiplier.
pub fn extract_extreme_solutions<S: Scalar>(
    tables: &LagrangeTables<S>,
    inst: &RdInstance<S>,
) -> Result<(Solution<S>, Solution<S>)> {
    let (lu, lq) = tables.path(Side::Low);
    let (hu, hq) = tables.path(Side::High);
    Ok((Solution::evaluate(inst, lu, lq)?, Solution::evaluate(inst, hu, hq)?))
}

/// `D + lambda * R`.
pub fn lagrangian_cost<S: Scalar>(solution: &Solution<S>, lambda: S) -> S {
    solution.distortion + lambda * solution.rate
}
