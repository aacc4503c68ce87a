//! Search for the multiplier whose Lagrangian solutions bracket a rate
//! budget.
//!
//! The Lagrangian rate `R(lambda)` is a non-increasing staircase whose steps
//! sit at *singular* multipliers, where two solutions of different rate are
//! simultaneously optimal. Each state of the cost-to-go tables proposes the
//! multiplier at which one of its alternative successors would overtake the
//! current choice; the extreme proposal over all states is the next step of
//! the staircase. Moving there only invalidates the states at or below the
//! proposing unit, so a move costs a partial table update instead of a full
//! solve.
//!
//! The initial quantizer choice is a sub-problem too. It is reported as the
//! owner at unit 0.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lagrangian::{extract_extreme_solutions, solve_tables, LagrangeTables, Side};
use crate::model::{RdInstance, Solution};
use crate::scalar::Scalar;

/// A sub-problem: unit `unit` coded at quantizer `quantizer`. Unit 0 stands
/// for the choice of the initial quantizer (its quantizer is always 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Owner {
    pub unit: usize,
    pub quantizer: usize,
}

impl Owner {
    pub const ROOT: Owner = Owner {
        unit: 0,
        quantizer: 0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Decrease,
    Increase,
}

impl Direction {
    fn side(self) -> Side {
        match self {
            Direction::Decrease => Side::High,
            Direction::Increase => Side::Low,
        }
    }
}

/// Multiplier at which `alt` becomes as good as the owner's current choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularCandidate<S> {
    pub owner: Owner,
    pub value: S,
    /// `(unit, quantizer)` of the alternative next coded unit.
    pub alt: (usize, usize),
    pub direction: Direction,
}

/// The nearest singular multiplier in one direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularStep<S> {
    pub lambda: S,
    /// Smallest owner proposing `lambda`.
    pub owner: Owner,
    /// Largest unit among all owners proposing `lambda`; the update scope.
    pub scope_unit: usize,
    /// One candidate per owner proposing `lambda`, in owner order.
    pub tied: Vec<SingularCandidate<S>>,
}

/// Alternatives of `owner` as `(next, segment distortion, segment rate)`.
fn alternatives<'a, S: Scalar>(
    inst: &'a RdInstance<S>,
    owner: Owner,
) -> impl Iterator<Item = ((usize, usize), S, S)> + 'a {
    let (units, qn) = (inst.unit_count(), inst.quantizer_count());
    let (v, q) = (owner.unit, owner.quantizer);
    let first = if v == 0 { 1 } else { v + 1 };
    let last = if v == 0 { 1 } else { units };
    (first..=last).flat_map(move |w| {
        (0..qn).map(move |qw| {
            if v == 0 {
                ((w, qw), inst.intra_dist(qw), inst.intra_rate(qw))
            } else {
                ((w, qw), inst.delta(v, q, w, qw), inst.pred_rate(v, q, w, qw))
            }
        })
    })
}

fn owner_branch<S: Scalar>(t: &LagrangeTables<S>, owner: Owner, side: Side) -> (S, S, Option<(usize, usize)>) {
    let b = if owner.unit == 0 {
        t.root(side)
    } else {
        t.branch(side, owner.unit, owner.quantizer)
    };
    (b.psi, b.ups, b.next)
}

fn check_owner<S: Scalar>(t: &LagrangeTables<S>, owner: Owner) -> Option<()> {
    let ok = if owner.unit == 0 {
        owner.quantizer == 0
    } else {
        owner.unit < t.unit_count() && owner.quantizer < t.quantizer_count()
    };
    ok.then_some(())
}

fn candidate<S: Scalar>(
    t: &LagrangeTables<S>,
    inst: &RdInstance<S>,
    owner: Owner,
    dir: Direction,
) -> Option<SingularCandidate<S>> {
    check_owner(t, owner)?;
    let side = dir.side();
    let lambda = t.lambda();
    let (psi, ups, _) = owner_branch(t, owner, side);
    let mut best: Option<(S, S, (usize, usize))> = None;
    let mut n = 0u64;
    for (next, d, r) in alternatives(inst, owner) {
        n += 1;
        let b = t.branch(side, next.0, next.1);
        let (alt_d, alt_r) = (d + b.psi, r + b.ups);
        let ratio = match dir {
            Direction::Decrease if alt_r > ups => (psi - alt_d) / (alt_r - ups),
            Direction::Increase if alt_r < ups => (alt_d - psi) / (ups - alt_r),
            _ => continue,
        };
        let inside = match dir {
            Direction::Decrease => ratio > S::zero() && ratio < lambda,
            Direction::Increase => ratio > lambda,
        };
        if !ratio.is_finite() || !inside || S::same_multiplier(ratio, lambda) {
            continue;
        }
        let better = match best {
            None => true,
            Some((br, brate, _)) if S::same_multiplier(ratio, br) => match dir {
                Direction::Decrease => alt_r > brate,
                Direction::Increase => alt_r < brate,
            },
            Some((br, _, _)) => match dir {
                Direction::Decrease => ratio > br,
                Direction::Increase => ratio < br,
            },
        };
        if better {
            best = Some((ratio, alt_r, next));
        }
    }
    t.count(n);
    best.map(|(value, _, alt)| SingularCandidate {
        owner,
        value,
        alt,
        direction: dir,
    })
}

/// Largest multiplier below the current one at which an alternative with a
/// larger rate-to-go ties the owner's current choice.
pub fn candidate_minus<S: Scalar>(
    tables: &LagrangeTables<S>,
    inst: &RdInstance<S>,
    owner: Owner,
) -> Option<SingularCandidate<S>> {
    candidate(tables, inst, owner, Direction::Decrease)
}

/// Smallest multiplier above the current one at which an alternative with a
/// smaller rate-to-go ties the owner's current choice.
pub fn candidate_plus<S: Scalar>(
    tables: &LagrangeTables<S>,
    inst: &RdInstance<S>,
    owner: Owner,
) -> Option<SingularCandidate<S>> {
    candidate(tables, inst, owner, Direction::Increase)
}

fn owners(units: usize, qn: usize) -> impl Iterator<Item = Owner> {
    std::iter::once(Owner::ROOT).chain(
        (1..units).flat_map(move |unit| (0..qn).map(move |quantizer| Owner { unit, quantizer })),
    )
}

fn next_singular<S: Scalar>(
    t: &LagrangeTables<S>,
    inst: &RdInstance<S>,
    dir: Direction,
) -> Option<SingularStep<S>> {
    let mut tied: Vec<SingularCandidate<S>> = Vec::new();
    for owner in owners(t.unit_count(), t.quantizer_count()) {
        let Some(c) = candidate(t, inst, owner, dir) else {
            continue;
        };
        match tied.first() {
            Some(b) if S::same_multiplier(c.value, b.value) => tied.push(c),
            Some(b) => {
                let closer = match dir {
                    Direction::Decrease => c.value > b.value,
                    Direction::Increase => c.value < b.value,
                };
                if closer {
                    tied = vec![c];
                }
            }
            None => tied.push(c),
        }
    }
    let first = *tied.first()?;
    Some(SingularStep {
        lambda: first.value,
        owner: first.owner,
        scope_unit: tied.iter().map(|c| c.owner.unit).max().unwrap_or(0),
        tied,
    })
}

/// The nearest singular multiplier below the current one, or `None` when
/// the current solution is optimal all the way down to zero.
pub fn next_singular_minus<S: Scalar>(
    tables: &LagrangeTables<S>,
    inst: &RdInstance<S>,
) -> Option<SingularStep<S>> {
    next_singular(tables, inst, Direction::Decrease)
}

/// The nearest singular multiplier above the current one, or `None` when
/// the current low-rate solution already has the minimum rate.
pub fn next_singular_plus<S: Scalar>(
    tables: &LagrangeTables<S>,
    inst: &RdInstance<S>,
) -> Option<SingularStep<S>> {
    next_singular(tables, inst, Direction::Increase)
}

/// Moves the tables to `new_lambda`, recomputing only the states at units
/// `1..=scope_unit` and the initial quantizer choice.
///
/// `new_lambda` must be the multiplier of a [`SingularStep`] computed on
/// these tables, and `scope_unit` its scope. States above the scope keep
/// their choice; only the tie branch that no longer applies is dropped.
/// With `verify`, the result is compared bitwise against a full solve.
pub fn apply_singular_move<S: Scalar>(
    tables: &mut LagrangeTables<S>,
    inst: &RdInstance<S>,
    new_lambda: S,
    scope_unit: usize,
    verify: bool,
) -> Result<()> {
    if new_lambda < S::zero() || !new_lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("multiplier {new_lambda} out of range")));
    }
    if scope_unit >= inst.unit_count() {
        return Err(Error::InvalidArgument(format!(
            "update scope {scope_unit} must be below unit {}",
            inst.unit_count()
        )));
    }
    let old = tables.lambda();
    if new_lambda < old {
        tables.copy_branch(Side::High, scope_unit);
    } else if new_lambda > old {
        tables.copy_branch(Side::Low, scope_unit);
    }
    tables.set_lambda(new_lambda);
    for v in (1..=scope_unit).rev() {
        tables.relax_unit(inst, v);
    }
    tables.relax_root(inst);
    if verify {
        let full = solve_tables(inst, new_lambda)?;
        if let Some(d) = tables.diff(&full) {
            return Err(Error::Consistency(format!("at lambda {new_lambda}: {d}")));
        }
    }
    Ok(())
}

/// Cost of the owner's sub-problem when its next coded unit is `next`.
fn successor_cost<S: Scalar>(t: &LagrangeTables<S>, inst: &RdInstance<S>, owner: Owner, next: (usize, usize)) -> Option<S> {
    let (w, qw) = next;
    let (units, qn) = (inst.unit_count(), inst.quantizer_count());
    if qw >= qn {
        return None;
    }
    let (d, r) = if owner.unit == 0 {
        if w != 1 {
            return None;
        }
        (inst.intra_dist(qw), inst.intra_rate(qw))
    } else {
        if w <= owner.unit || w > units {
            return None;
        }
        (inst.delta(owner.unit, owner.quantizer, w, qw), inst.pred_rate(owner.unit, owner.quantizer, w, qw))
    };
    Some(d + t.lambda() * r + t.phi(w, qw))
}

/// `true` iff both `previous_best` and `alt` attain the owner's optimal
/// cost under the tables' multiplier.
pub fn verify_lemma1<S: Scalar>(
    tables: &LagrangeTables<S>,
    inst: &RdInstance<S>,
    owner: Owner,
    previous_best: (usize, usize),
    alt: (usize, usize),
) -> bool {
    if check_owner(tables, owner).is_none() {
        return false;
    }
    let (psi, ups, _) = owner_branch(tables, owner, Side::Low);
    let opt = psi + tables.lambda() * ups;
    [previous_best, alt]
        .into_iter()
        .all(|n| successor_cost(tables, inst, owner, n).is_some_and(|c| S::ties(c, opt)))
}

/// `|D(lower) - D(upper)|`.
pub fn duality_gap_bound<S: Scalar>(lower: &Solution<S>, upper: &Solution<S>) -> S {
    (lower.distortion - upper.distortion).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Coarse,
    Fine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry<S> {
    pub lambda: S,
    pub rate_lower: S,
    pub rate_upper: S,
    pub phase: Phase,
    /// Owner of the singular move that reached `lambda` (fine phase).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub owner: Option<Owner>,
    /// Whether every owner's old and new choice tie at `lambda`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma1: Option<bool>,
}

impl<S: Scalar> TraceEntry<S> {
    pub fn map<T>(&self, f: impl Fn(S) -> T) -> TraceEntry<T> {
        TraceEntry {
            lambda: f(self.lambda),
            rate_lower: f(self.rate_lower),
            rate_upper: f(self.rate_upper),
            phase: self.phase,
            owner: self.owner,
            lemma1: self.lemma1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig<S> {
    /// Starting multiplier, must be positive.
    pub lambda_init: S,
    /// Limit on fine-phase moves.
    pub max_iters: usize,
    /// Run the doubling/bisection phase before marching.
    pub coarse: bool,
    /// Bisection stops once the bracket is narrower than this fraction of
    /// its midpoint.
    pub coarse_rel_width: f64,
    /// Upper limit for multiplier doubling.
    pub lambda_cap: f64,
    /// Smallest multiplier tried by halving before falling back to zero.
    pub lambda_floor: f64,
    /// Compare every incremental update against a full solve.
    pub verify_updates: bool,
    /// Record the tie check of every move in the trace.
    pub check_lemma1: bool,
}

impl<S: Scalar> Default for SearchConfig<S> {
    fn default() -> Self {
        Self {
            lambda_init: S::one(),
            max_iters: 100_000,
            coarse: true,
            coarse_rel_width: 1e-6,
            lambda_cap: 1e12,
            lambda_floor: 1e-6,
            verify_updates: false,
            check_lemma1: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult<S> {
    pub lambda_star: S,
    /// Best Lagrangian solution within budget.
    pub lower: Solution<S>,
    /// Lagrangian solution at or above budget.
    pub upper: Solution<S>,
    /// `|D(lower) - D(upper)|`, an upper bound on the distortion excess of
    /// `lower` over the constrained optimum.
    pub bound: S,
    pub trace: Vec<TraceEntry<S>>,
    /// Fine-phase moves.
    pub iterations: usize,
    /// Moves that changed neither extreme solution.
    pub idle_moves: usize,
    /// Full solves during the coarse phase.
    pub coarse_evaluations: usize,
    /// Candidate successor evaluations over the whole search.
    pub evaluations: u64,
}

impl<S: Scalar> SearchResult<S> {
    pub fn map<T>(&self, f: impl Fn(S) -> T) -> SearchResult<T> {
        SearchResult {
            lambda_star: f(self.lambda_star),
            lower: self.lower.map(&f),
            upper: self.upper.map(&f),
            bound: f(self.bound),
            trace: self.trace.iter().map(|e| e.map(&f)).collect(),
            iterations: self.iterations,
            idle_moves: self.idle_moves,
            coarse_evaluations: self.coarse_evaluations,
            evaluations: self.evaluations,
        }
    }
}

struct Search<'a, S> {
    inst: &'a RdInstance<S>,
    budget: S,
    cfg: &'a SearchConfig<S>,
    trace: Vec<TraceEntry<S>>,
    coarse_evaluations: usize,
    evaluations: u64,
}

impl<'a, S: Scalar> Search<'a, S> {
    fn solve(&mut self, lambda: S) -> Result<(LagrangeTables<S>, Solution<S>, Solution<S>)> {
        let t = solve_tables(self.inst, lambda)?;
        let (lo, hi) = extract_extreme_solutions(&t, self.inst)?;
        self.coarse_evaluations += 1;
        self.evaluations += t.evaluations();
        self.trace.push(TraceEntry {
            lambda,
            rate_lower: lo.rate,
            rate_upper: hi.rate,
            phase: Phase::Coarse,
            owner: None,
            lemma1: None,
        });
        Ok((t, lo, hi))
    }

    fn exact(&self, lambda: S, sol: Solution<S>) -> SearchResult<S> {
        SearchResult {
            lambda_star: lambda,
            lower: sol.clone(),
            upper: sol,
            bound: S::zero(),
            trace: self.trace.clone(),
            iterations: 0,
            idle_moves: 0,
            coarse_evaluations: self.coarse_evaluations,
            evaluations: self.evaluations,
        }
    }

    /// Doubling and bisection on the low-rate solution. Returns either a
    /// finished result (rate hit exactly) or the multiplier to march from.
    fn coarse(&mut self) -> Result<std::result::Result<SearchResult<S>, S>> {
        let b = self.budget;
        let cap = S::from_f64_lossy(self.cfg.lambda_cap);
        let floor = S::from_f64_lossy(self.cfg.lambda_floor);
        let two = S::one() + S::one();
        let mut lambda = self.cfg.lambda_init;
        let (_, mut sol, _) = self.solve(lambda)?;
        if sol.rate == b {
            return Ok(Ok(self.exact(lambda, sol)));
        }
        // above: rate of the low solution exceeds the budget; below: fits
        let (mut above, mut below);
        if sol.rate > b {
            above = (lambda, sol.clone());
            loop {
                if lambda >= cap {
                    return Ok(Err(lambda));
                }
                lambda = lambda * two;
                if lambda > cap {
                    lambda = cap;
                }
                (_, sol, _) = self.solve(lambda)?;
                if sol.rate == b {
                    return Ok(Ok(self.exact(lambda, sol)));
                }
                if sol.rate < b {
                    below = (lambda, sol);
                    break;
                }
                above = (lambda, sol.clone());
            }
        } else {
            below = (lambda, sol.clone());
            loop {
                lambda = if lambda <= floor { S::zero() } else { lambda.half() };
                (_, sol, _) = self.solve(lambda)?;
                if sol.rate == b {
                    return Ok(Ok(self.exact(lambda, sol)));
                }
                if sol.rate > b {
                    above = (lambda, sol);
                    break;
                }
                below = (lambda, sol.clone());
                if lambda.is_zero() {
                    return Ok(Err(lambda));
                }
            }
        }
        loop {
            let width = below.0 - above.0;
            let mid = S::between(above.0, below.0);
            if width.to_f64_lossy() < self.cfg.coarse_rel_width * mid.to_f64_lossy() {
                break;
            }
            let (_, m, _) = self.solve(mid)?;
            if m.rate == b {
                return Ok(Ok(self.exact(mid, m)));
            }
            let stale = m.same_assignment(&above.1) || m.same_assignment(&below.1);
            if m.rate > b {
                above = (mid, m);
            } else {
                below = (mid, m);
            }
            if stale {
                break;
            }
        }
        Ok(Err(below.0))
    }

    fn fine(&mut self, start: S) -> Result<SearchResult<S>> {
        let inst = self.inst;
        let b = self.budget;
        let mut t = solve_tables(inst, start)?;
        let mut iterations = 0usize;
        let mut idle = 0usize;
        let mut prev: Option<(Solution<S>, Solution<S>)> = None;
        loop {
            let (lo, hi) = extract_extreme_solutions(&t, inst)?;
            if let Some((plo, phi)) = &prev {
                if plo.same_assignment(&lo) && phi.same_assignment(&hi) {
                    idle += 1;
                }
            }
            let done = |lower: Solution<S>, upper: Solution<S>, lambda: S, trace: &Vec<TraceEntry<S>>| SearchResult {
                lambda_star: lambda,
                bound: duality_gap_bound(&lower, &upper),
                lower,
                upper,
                trace: trace.clone(),
                iterations,
                idle_moves: idle,
                coarse_evaluations: self.coarse_evaluations,
                evaluations: self.evaluations + t.evaluations(),
            };
            if lo.rate == b {
                return Ok(done(lo.clone(), lo, t.lambda(), &self.trace));
            }
            if hi.rate == b {
                return Ok(done(hi.clone(), hi, t.lambda(), &self.trace));
            }
            if lo.rate <= b && b <= hi.rate {
                return Ok(done(lo, hi, t.lambda(), &self.trace));
            }
            let dir = if hi.rate < b {
                Direction::Decrease
            } else {
                Direction::Increase
            };
            let step = match dir {
                Direction::Decrease => next_singular_minus(&t, inst),
                Direction::Increase => next_singular_plus(&t, inst),
            };
            let Some(step) = step else {
                if dir == Direction::Decrease {
                    // every smaller multiplier keeps this solution: budget slack
                    return Ok(done(hi.clone(), hi, S::zero(), &self.trace));
                }
                return Err(Error::Consistency(format!(
                    "low-rate solution of rate {} exceeds budget {b} but no larger multiplier changes it",
                    lo.rate
                )));
            };
            if iterations >= self.cfg.max_iters {
                return Err(Error::IterationLimit {
                    limit: self.cfg.max_iters,
                    trace: self.trace.iter().map(|e| e.map(|x| x.to_f64_lossy())).collect(),
                });
            }
            let previous: Vec<Option<(usize, usize)>> = step
                .tied
                .iter()
                .map(|c| owner_branch(&t, c.owner, dir.side()).2)
                .collect();
            apply_singular_move(&mut t, inst, step.lambda, step.scope_unit, self.cfg.verify_updates)?;
            iterations += 1;
            let lemma1 = self.cfg.check_lemma1.then(|| {
                step.tied.iter().zip(&previous).all(|(c, p)| {
                    p.is_some_and(|p| verify_lemma1(&t, inst, c.owner, p, c.alt))
                })
            });
            let (nlo, nhi) = extract_extreme_solutions(&t, inst)?;
            self.trace.push(TraceEntry {
                lambda: step.lambda,
                rate_lower: nlo.rate,
                rate_upper: nhi.rate,
                phase: Phase::Fine,
                owner: Some(step.owner),
                lemma1,
            });
            prev = Some((lo, hi));
        }
    }
}

/// Finds a multiplier whose low- and high-rate Lagrangian solutions bracket
/// `budget`, returning both and the distortion bound between them.
///
/// Fails with [`Error::Infeasible`] if `budget` is below the least
/// achievable rate and with [`Error::IterationLimit`] if marching takes more
/// than `config.max_iters` moves.
pub fn search_optimal_multiplier<S: Scalar>(
    inst: &RdInstance<S>,
    budget: S,
    config: &SearchConfig<S>,
) -> Result<SearchResult<S>> {
    if !(config.lambda_init > S::zero()) || !config.lambda_init.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "initial multiplier must be positive, got {}",
            config.lambda_init
        )));
    }
    if !budget.is_finite() {
        return Err(Error::InvalidArgument(format!("budget must be finite, got {budget}")));
    }
    let min_rate = inst.min_rate();
    if budget < min_rate {
        return Err(Error::Infeasible {
            budget: budget.to_f64_lossy(),
            min_rate: min_rate.to_f64_lossy(),
        });
    }
    let mut s = Search {
        inst,
        budget,
        cfg: config,
        trace: Vec::new(),
        coarse_evaluations: 0,
        evaluations: 0,
    };
    let start = if config.coarse {
        match s.coarse()? {
            Ok(done) => return Ok(done),
            Err(lambda) => lambda,
        }
    } else {
        config.lambda_init
    };
    s.fine(start)
}

/// One multiplier of the rate staircase with its two extreme solutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaircaseRow<S> {
    pub lambda: S,
    pub rate_lower: S,
    pub rate_upper: S,
    pub distortion_lower: S,
    pub distortion_upper: S,
}

/// Options for [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub max_iters: usize,
    pub verify_updates: bool,
    pub check_lemma1: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            max_iters: 1_000_000,
            verify_updates: false,
            check_lemma1: false,
        }
    }
}

/// Staircase of `R(lambda)` on `[lambda_lo, lambda_hi]`, sorted by ascending
/// multiplier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Staircase<S> {
    pub rows: Vec<StaircaseRow<S>>,
    /// Singular moves made while marching down.
    pub moves: usize,
    /// Tie check outcome of every move, when checked.
    pub lemma1: Vec<bool>,
}

fn row<S: Scalar>(lambda: S, lo: &Solution<S>, hi: &Solution<S>) -> StaircaseRow<S> {
    StaircaseRow {
        lambda,
        rate_lower: lo.rate,
        rate_upper: hi.rate,
        distortion_lower: lo.distortion,
        distortion_upper: hi.distortion,
    }
}

/// Marches from `lambda_hi` down through every singular multiplier above
/// `lambda_lo`. Rows are the two endpoints and each singular multiplier; the
/// `lambda_lo` row reports the solution valid just above it.
pub fn sweep<S: Scalar>(
    inst: &RdInstance<S>,
    lambda_lo: S,
    lambda_hi: S,
    config: &SweepConfig,
) -> Result<Staircase<S>> {
    if lambda_lo < S::zero() || lambda_hi < lambda_lo {
        return Err(Error::InvalidArgument(format!(
            "sweep range [{lambda_lo}, {lambda_hi}] is empty or negative"
        )));
    }
    let mut t = solve_tables(inst, lambda_hi)?;
    let (lo, hi) = extract_extreme_solutions(&t, inst)?;
    let mut rows = vec![row(lambda_hi, &lo, &hi)];
    let mut lemma1 = Vec::new();
    let mut moves = 0;
    while let Some(step) = next_singular_minus(&t, inst) {
        if step.lambda < lambda_lo {
            break;
        }
        if moves >= config.max_iters {
            let trace = rows
                .iter()
                .map(|r| TraceEntry {
                    lambda: r.lambda.to_f64_lossy(),
                    rate_lower: r.rate_lower.to_f64_lossy(),
                    rate_upper: r.rate_upper.to_f64_lossy(),
                    phase: Phase::Fine,
                    owner: None,
                    lemma1: None,
                })
                .collect();
            return Err(Error::IterationLimit {
                limit: config.max_iters,
                trace,
            });
        }
        let previous: Vec<_> = step
            .tied
            .iter()
            .map(|c| owner_branch(&t, c.owner, Side::High).2)
            .collect();
        apply_singular_move(&mut t, inst, step.lambda, step.scope_unit, config.verify_updates)?;
        moves += 1;
        if config.check_lemma1 {
            lemma1.push(step.tied.iter().zip(&previous).all(|(c, p)| {
                p.is_some_and(|p| verify_lemma1(&t, inst, c.owner, p, c.alt))
            }));
        }
        let (lo, hi) = extract_extreme_solutions(&t, inst)?;
        rows.push(row(step.lambda, &lo, &hi));
    }
    if rows.last().is_some_and(|r| r.lambda != lambda_lo) {
        let (_, hi) = extract_extreme_solutions(&t, inst)?;
        rows.push(row(lambda_lo, &hi, &hi));
    }
    rows.reverse();
    Ok(Staircase { rows, moves, lemma1 })
}

/// Writes staircase rows as CSV with a header line.
pub fn write_staircase_csv<S: Scalar, W: Write>(rows: &[StaircaseRow<S>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "rate_lower", "rate_upper", "distortion_lower", "distortion_upper"])?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            r.rate_lower.to_string(),
            r.rate_upper.to_string(),
            r.distortion_lower.to_string(),
            r.distortion_upper.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
