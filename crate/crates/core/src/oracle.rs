//! Exhaustive reference solvers.
//!
//! Nothing here reuses solver code: assignments are enumerated depth-first
//! and their totals summed straight from the raw tables (never the memoized
//! segment distortions), then cross-checked against
//! [`evaluate_solution`].

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::KnapsackSpec;
use crate::model::{evaluate_solution, RdInstance, Solution};
use crate::scalar::Scalar;

/// Default limit on enumerated assignments.
pub const DEFAULT_ENUM_CAP: u128 = 20_000_000;

/// Number of complete assignments: `Q^2 (1 + Q)^(V - 2)`.
pub fn assignment_count(units: usize, quantizers: usize) -> u128 {
    let q = quantizers as u128;
    let mut n = q.saturating_mul(q);
    for _ in 2..units {
        n = n.saturating_mul(q + 1);
    }
    n
}

fn check_cap<S: Scalar>(inst: &RdInstance<S>, cap: u128) -> Result<()> {
    let count = assignment_count(inst.unit_count(), inst.quantizer_count());
    if count > cap {
        return Err(Error::TooLarge { count, cap });
    }
    Ok(())
}

/// Calls `f(units, quantizers, rate, distortion)` for every assignment.
fn enumerate<S: Scalar>(inst: &RdInstance<S>, mut f: impl FnMut(&[usize], &[usize], S, S)) {
    let units = inst.unit_count();
    let qn = inst.quantizer_count();
    let mut vs = Vec::with_capacity(units);
    let mut qs = Vec::with_capacity(units);
    for q in 0..qn {
        vs.push(1);
        qs.push(q);
        walk(inst, &mut vs, &mut qs, inst.intra_rate(q), inst.intra_dist(q), &mut f);
        vs.pop();
        qs.pop();
    }

    fn walk<S: Scalar>(
        inst: &RdInstance<S>,
        vs: &mut Vec<usize>,
        qs: &mut Vec<usize>,
        rate: S,
        dist: S,
        f: &mut impl FnMut(&[usize], &[usize], S, S),
    ) {
        let units = inst.unit_count();
        let (v, q) = (*vs.last().unwrap(), *qs.last().unwrap());
        if v == units {
            f(vs, qs, rate, dist);
            return;
        }
        for w in v + 1..=units {
            for qw in 0..inst.quantizer_count() {
                let mut d = inst.coded_dist(v, q, w, qw);
                for u in v + 1..w {
                    d = d + inst.interp_dist(u, v, w, q, qw);
                }
                vs.push(w);
                qs.push(qw);
                walk(inst, vs, qs, rate + inst.pred_rate(v, q, w, qw), dist + d, f);
                vs.pop();
                qs.pop();
            }
        }
    }
}

struct Best<S> {
    key: S,
    units: Vec<usize>,
    qs: Vec<usize>,
    rate: S,
    dist: S,
}

fn order<S: Scalar>(best: &Best<S>, key: S, rate: S, units: &[usize], qs: &[usize]) -> Ordering {
    if !S::ties(key, best.key) {
        return key.partial_cmp(&best.key).unwrap_or(Ordering::Equal);
    }
    rate.partial_cmp(&best.rate)
        .unwrap_or(Ordering::Equal)
        .then_with(|| units.cmp(&best.units))
        .then_with(|| qs.cmp(&best.qs))
}

fn minimize<S: Scalar>(
    inst: &RdInstance<S>,
    key: impl Fn(S, S) -> Option<S>,
) -> Result<Option<Solution<S>>> {
    let mut best: Option<Best<S>> = None;
    enumerate(inst, |units, qs, rate, dist| {
        let Some(k) = key(rate, dist) else {
            return;
        };
        if best.as_ref().is_none_or(|b| order(b, k, rate, units, qs) == Ordering::Less) {
            best = Some(Best {
                key: k,
                units: units.to_vec(),
                qs: qs.to_vec(),
                rate,
                dist,
            });
        }
    });
    let Some(b) = best else {
        return Ok(None);
    };
    let (r, d) = evaluate_solution(inst, &b.units, &b.qs)?;
    if !S::ties(r, b.rate) || !S::ties(d, b.dist) {
        return Err(Error::Consistency(format!(
            "naive totals ({}, {}) disagree with evaluation ({r}, {d})",
            b.rate, b.dist
        )));
    }
    Ok(Some(Solution {
        units: b.units,
        quantizers: b.qs,
        rate: b.rate,
        distortion: b.dist,
    }))
}

/// Least-distortion assignment with rate at most `budget`; ties go to the
/// smaller rate, then lexicographic order.
pub fn brute_force<S: Scalar>(inst: &RdInstance<S>, budget: S) -> Result<Solution<S>> {
    brute_force_capped(inst, budget, DEFAULT_ENUM_CAP)
}

pub fn brute_force_capped<S: Scalar>(inst: &RdInstance<S>, budget: S, cap: u128) -> Result<Solution<S>> {
    check_cap(inst, cap)?;
    minimize(inst, |r, d| (r <= budget).then_some(d))?.ok_or_else(|| Error::Infeasible {
        budget: budget.to_f64_lossy(),
        min_rate: inst.min_rate().to_f64_lossy(),
    })
}

/// Least `D + lambda * R` assignment with the same tie rule as
/// [`brute_force`].
pub fn lagrangian_brute<S: Scalar>(inst: &RdInstance<S>, lambda: S) -> Result<Solution<S>> {
    lagrangian_brute_capped(inst, lambda, DEFAULT_ENUM_CAP)
}

pub fn lagrangian_brute_capped<S: Scalar>(inst: &RdInstance<S>, lambda: S, cap: u128) -> Result<Solution<S>> {
    check_cap(inst, cap)?;
    minimize(inst, |r, d| Some(d + lambda * r))?
        .ok_or_else(|| Error::Consistency("instance has no assignments".into()))
}

/// Every distinct `(rate, distortion)` pair, sorted by rate then
/// distortion.
pub fn rd_points<S: Scalar>(inst: &RdInstance<S>, cap: u128) -> Result<Vec<(S, S)>> {
    check_cap(inst, cap)?;
    let mut pts = Vec::new();
    enumerate(inst, |_, _, r, d| pts.push((r, d)));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    pts.dedup();
    Ok(pts)
}

/// A maximal multiplier interval on which one `(rate, distortion)` pair is
/// the Lagrangian optimum (ties resolved to the smaller rate).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plateau<S> {
    pub lambda_from: S,
    pub lambda_to: S,
    pub rate: S,
    pub distortion: S,
}

/// Reference staircase from a dense multiplier grid.
///
/// The grid step is the smaller of `resolution` and half the least gap
/// between consecutive convex-hull breakpoints, then halved until the
/// plateau set no longer changes.
pub fn convex_hull_sweep<S: Scalar>(
    inst: &RdInstance<S>,
    lambda_lo: S,
    lambda_hi: S,
    resolution: S,
    cap: u128,
) -> Result<Vec<Plateau<S>>> {
    if lambda_lo < S::zero() || lambda_hi < lambda_lo || !(resolution > S::zero()) {
        return Err(Error::InvalidArgument(format!(
            "bad sweep range [{lambda_lo}, {lambda_hi}] / resolution {resolution}"
        )));
    }
    let pts = pareto(rd_points(inst, cap)?);
    let bps = hull_breakpoints(&pts);
    let mut step = resolution;
    for w in bps.windows(2) {
        let gap = (w[1] - w[0]).half();
        if gap > S::zero() && gap < step {
            step = gap;
        }
    }
    if let Some(&first) = bps.first() {
        if first > S::zero() && first.half() < step {
            step = first.half();
        }
    }
    // past twice the last breakpoint the minimum-rate point wins everywhere,
    // so the dense grid stops there and `lambda_hi` is sampled on its own
    let top = bps.last().map_or(lambda_lo, |&b| b + b + S::one());
    let dense_hi = if top < lambda_lo {
        lambda_lo
    } else if top < lambda_hi {
        top
    } else {
        lambda_hi
    };
    let sample = |step: S| {
        let mut p = grid_plateaus(&pts, lambda_lo, dense_hi, step);
        if dense_hi < lambda_hi {
            let tail = grid_plateaus(&pts, lambda_hi, lambda_hi, step);
            merge(&mut p, tail);
        }
        p
    };
    let mut plateaus = sample(step);
    for _ in 0..8 {
        step = step.half();
        let finer = sample(step);
        let same = finer.len() == plateaus.len()
            && finer.iter().zip(&plateaus).all(|(a, b)| a.rate == b.rate && a.distortion == b.distortion);
        plateaus = finer;
        if same {
            break;
        }
    }
    Ok(plateaus)
}

fn merge<S: Scalar>(out: &mut Vec<Plateau<S>>, more: Vec<Plateau<S>>) {
    for p in more {
        match out.last_mut() {
            Some(l) if l.rate == p.rate && l.distortion == p.distortion => l.lambda_to = p.lambda_to,
            _ => out.push(p),
        }
    }
}

/// Pareto-optimal points: strictly decreasing distortion as rate grows.
fn pareto<S: Scalar>(sorted: Vec<(S, S)>) -> Vec<(S, S)> {
    let mut out: Vec<(S, S)> = Vec::new();
    for (r, d) in sorted {
        if out.last().is_none_or(|&(_, ld)| d < ld) {
            out.push((r, d));
        }
    }
    out
}

/// Multipliers where the lower convex hull changes vertex, ascending.
fn hull_breakpoints<S: Scalar>(pts: &[(S, S)]) -> Vec<S> {
    let mut hull: Vec<(S, S)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or above segment a-p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= S::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut bps: Vec<S> = hull.windows(2).map(|w| (w[0].1 - w[1].1) / (w[1].0 - w[0].0)).collect();
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    bps
}

fn grid_plateaus<S: Scalar>(pts: &[(S, S)], lo: S, hi: S, step: S) -> Vec<Plateau<S>> {
    let mut out: Vec<Plateau<S>> = Vec::new();
    let mut k: u64 = 0;
    loop {
        let mut lambda = lo + S::from_count(k) * step;
        if lambda > hi {
            lambda = hi;
        }
        let mut best = pts[0];
        let mut best_cost = best.1 + lambda * best.0;
        for &(r, d) in &pts[1..] {
            let c = d + lambda * r;
            if !S::ties(c, best_cost) && c < best_cost {
                best = (r, d);
                best_cost = c;
            }
        }
        match out.last_mut() {
            Some(p) if p.rate == best.0 && p.distortion == best.1 => p.lambda_to = lambda,
            _ => out.push(Plateau {
                lambda_from: lambda,
                lambda_to: lambda,
                rate: best.0,
                distortion: best.1,
            }),
        }
        if lambda >= hi {
            break;
        }
        k += 1;
    }
    out
}

/// Optimal 0/1 knapsack profit.
pub fn knapsack_solve(spec: &KnapsackSpec) -> u64 {
    let cap = spec.capacity as usize;
    let mut best = vec![0u64; cap + 1];
    for item in &spec.items {
        let w = item.weight as usize;
        if w > cap {
            continue;
        }
        for c in (w..=cap).rev() {
            best[c] = best[c].max(best[c - w] + item.profit);
        }
    }
    best[cap]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RdTables;

    fn crossing() -> RdInstance<f64> {
        let mut t = RdTables::new(3, vec![30]);
        t.set_intra(0, 0.0, 0.0).unwrap();
        t.set_pred(2, 1, 0, 0, 4.0, 2.0).unwrap();
        t.set_pred(3, 2, 0, 0, 4.0, 2.0).unwrap();
        t.set_pred(3, 1, 0, 0, 4.0, 3.0).unwrap();
        t.set_interp(2, 1, 3, 0, 0, 7.0).unwrap();
        t.build().unwrap()
    }

    #[test]
    fn knapsack_small_cases() {
        assert_eq!(knapsack_solve(&KnapsackSpec::new([], 5)), 0);
        assert_eq!(knapsack_solve(&KnapsackSpec::new([(3, 5), (4, 6)], 4)), 6);
        assert_eq!(knapsack_solve(&KnapsackSpec::new([(3, 5), (4, 6)], 7)), 11);
    }

    #[test]
    fn counts_assignments() {
        assert_eq!(assignment_count(2, 3), 9);
        assert_eq!(assignment_count(4, 2), 4 * 9);
    }

    #[test]
    fn two_units_single_quantizer() {
        let mut t = RdTables::new(2, vec![0]);
        t.set_intra(0, 1.0, 2.0).unwrap();
        t.set_pred(2, 1, 0, 0, 3.0, 4.0).unwrap();
        let inst = t.build().unwrap();
        let s = brute_force(&inst, 4.0).unwrap();
        assert_eq!((s.units, s.rate, s.distortion), (vec![1, 2], 4.0, 6.0));
        assert!(matches!(brute_force(&inst, 3.0), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn lagrangian_endpoints() {
        let inst = crossing();
        assert_eq!(lagrangian_brute(&inst, 0.0).unwrap().distortion, 4.0);
        assert_eq!(lagrangian_brute(&inst, 1e6).unwrap().rate, 4.0);
        // both tie at 1.5; the smaller rate wins
        assert_eq!(lagrangian_brute(&inst, 1.5).unwrap().rate, 4.0);
    }

    #[test]
    fn budget_respected() {
        let inst = crossing();
        assert_eq!(brute_force(&inst, 7.0).unwrap().distortion, 10.0);
        assert_eq!(brute_force(&inst, 8.0).unwrap().distortion, 4.0);
    }

    #[test]
    fn cap_is_enforced() {
        let err = brute_force_capped(&crossing(), 10.0, 1).unwrap_err();
        assert!(matches!(err, Error::TooLarge { count: 2, cap: 1 }));
    }

    #[test]
    fn hull_sweep_of_crossing() {
        let p = convex_hull_sweep(&crossing(), 0.0, 5.0, 0.5, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!((p[0].rate, p[1].rate), (8.0, 4.0));
        assert!(p[0].lambda_to < 1.5 && p[1].lambda_from >= 1.5);
        assert!(p[1].lambda_from - p[0].lambda_to <= 0.75);
    }

    #[test]
    fn hull_sweep_single_solution() {
        let mut t = RdTables::new(2, vec![0]);
        t.set_intra(0, 1.0, 2.0).unwrap();
        t.set_pred(2, 1, 0, 0, 3.0, 4.0).unwrap();
        let p = convex_hull_sweep(&t.build().unwrap(), 0.0, 3.0, 1.0, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].lambda_from, p[0].lambda_to), (0.0, 3.0));
    }
}
