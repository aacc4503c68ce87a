//! Problem instance and solution representation.
//!
//! Units are numbered `1..=V`; quantizers are addressed by their position
//! in the instance's quantizer list. The
//! quantizer labels themselves (e.g. QP values) are opaque and never
//! interpreted by the solvers.
//!
//! An instance is assembled as [`RdTables`] (entries may still be missing),
//! checked with [`validate_instance`], and frozen into an [`RdInstance`],
//! which precomputes every segment distortion so the solvers get O(1)
//! lookups.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Index arithmetic shared by the raw tables and the frozen instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub units: usize,
    pub qn: usize,
    interp_offsets: Vec<usize>,
    interp_len: usize,
}

impl Layout {
    fn new(units: usize, qn: usize) -> Self {
        let pairs = pair_count(units);
        let mut interp_offsets = Vec::with_capacity(pairs);
        let mut off = 0;
        for v in 2..=units {
            for v_prev in 1..v {
                interp_offsets.push(off);
                off += (v - v_prev - 1) * qn * qn;
            }
        }
        Self {
            units,
            qn,
            interp_offsets,
            interp_len: off,
        }
    }

    #[inline]
    pub fn pair(v_prev: usize, v: usize) -> usize {
        (v - 1) * (v - 2) / 2 + (v_prev - 1)
    }

    #[inline]
    pub fn pred_index(&self, v_prev: usize, q_prev: usize, v: usize, q: usize) -> usize {
        (Self::pair(v_prev, v) * self.qn + q_prev) * self.qn + q
    }

    #[inline]
    pub fn interp_index(
        &self,
        u: usize,
        v_left: usize,
        v_right: usize,
        q_left: usize,
        q_right: usize,
    ) -> usize {
        self.interp_offsets[Self::pair(v_left, v_right)]
            + ((u - v_left - 1) * self.qn + q_left) * self.qn
            + q_right
    }

    fn pred_len(&self) -> usize {
        pair_count(self.units) * self.qn * self.qn
    }

    fn check_unit(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.units {
            return Err(Error::Index(format!("unit {v} outside 1..={}", self.units)));
        }
        Ok(())
    }

    fn check_quantizer(&self, q: usize) -> Result<()> {
        if q >= self.qn {
            return Err(Error::Index(format!(
                "quantizer index {q} outside 0..{}",
                self.qn
            )));
        }
        Ok(())
    }

    fn check_pred(&self, v_prev: usize, q_prev: usize, v: usize, q: usize) -> Result<()> {
        self.check_unit(v_prev)?;
        self.check_unit(v)?;
        if v_prev >= v {
            return Err(Error::Index(format!(
                "predictor unit {v_prev} must precede unit {v}"
            )));
        }
        self.check_quantizer(q_prev)?;
        self.check_quantizer(q)
    }

    fn check_interp(
        &self,
        u: usize,
        v_left: usize,
        v_right: usize,
        q_left: usize,
        q_right: usize,
    ) -> Result<()> {
        self.check_unit(v_left)?;
        self.check_unit(v_right)?;
        if !(v_left < u && u < v_right) {
            return Err(Error::Index(format!(
                "interpolated unit {u} must lie strictly between {v_left} and {v_right}"
            )));
        }
        self.check_quantizer(q_left)?;
        self.check_quantizer(q_right)
    }
}

fn pair_count(units: usize) -> usize {
    units * units.saturating_sub(1) / 2
}

/// Which table a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableName {
    IntraRate,
    IntraDist,
    PredRate,
    CodedDist,
    InterpDist,
}

impl fmt::Display for TableName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableName::IntraRate => "intra_rate",
            TableName::IntraDist => "intra_dist",
            TableName::PredRate => "pred_rate",
            TableName::CodedDist => "coded_dist",
            TableName::InterpDist => "interp_dist",
        })
    }
}

/// Position of a single table entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryIndex {
    Intra {
        q: usize,
    },
    Pred {
        v: usize,
        v_prev: usize,
        q_prev: usize,
        q: usize,
    },
    Interp {
        u: usize,
        v_left: usize,
        v_right: usize,
        q_left: usize,
        q_right: usize,
    },
}

impl fmt::Display for EntryIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EntryIndex::Intra { q } => write!(f, "(q={q})"),
            EntryIndex::Pred { v, v_prev, q_prev, q } => {
                write!(f, "(v={v}, v_prev={v_prev}, q_prev={q_prev}, q={q})")
            }
            EntryIndex::Interp {
                u,
                v_left,
                v_right,
                q_left,
                q_right,
            } => write!(
                f,
                "(u={u}, v_left={v_left}, v_right={v_right}, q_left={q_left}, q_right={q_right})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    TooFewUnits { unit_count: usize },
    NoQuantizers,
    DuplicateQuantizer { label: i64 },
    Missing { table: TableName, entry: EntryIndex },
    Negative { table: TableName, entry: EntryIndex, value: f64 },
    NonFinite { table: TableName, entry: EntryIndex },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewUnits { unit_count } => {
                write!(f, "unit_count is {unit_count}, at least 2 units are required")
            }
            Violation::NoQuantizers => f.write_str("quantizer set is empty"),
            Violation::DuplicateQuantizer { label } => {
                write!(f, "quantizer label {label} appears more than once")
            }
            Violation::Missing { table, entry } => write!(f, "{table} missing entry {entry}"),
            Violation::Negative {
                table,
                entry,
                value,
            } => write!(f, "{table} entry {entry} is negative ({value})"),
            Violation::NonFinite { table, entry } => {
                write!(f, "{table} entry {entry} is not finite")
            }
        }
    }
}

/// Raw, possibly incomplete rate/distortion tables.
#[derive(Debug, Clone, PartialEq)]
pub struct RdTables<S> {
    layout: Layout,
    quantizers: Vec<i64>,
    intra_rate: Vec<Option<S>>,
    intra_dist: Vec<Option<S>>,
    pred_rate: Vec<Option<S>>,
    coded_dist: Vec<Option<S>>,
    interp_dist: Vec<Option<S>>,
}

impl<S: Scalar> RdTables<S> {
    pub fn new(unit_count: usize, quantizers: Vec<i64>) -> Self {
        let layout = Layout::new(unit_count, quantizers.len());
        let qn = layout.qn;
        Self {
            intra_rate: vec![None; qn],
            intra_dist: vec![None; qn],
            pred_rate: vec![None; layout.pred_len()],
            coded_dist: vec![None; layout.pred_len()],
            interp_dist: vec![None; layout.interp_len],
            layout,
            quantizers,
        }
    }

    pub fn unit_count(&self) -> usize {
        self.layout.units
    }

    pub fn quantizers(&self) -> &[i64] {
        &self.quantizers
    }

    pub fn set_intra(&mut self, q: usize, rate: S, dist: S) -> Result<()> {
        self.layout.check_quantizer(q)?;
        self.intra_rate[q] = Some(rate);
        self.intra_dist[q] = Some(dist);
        Ok(())
    }

    /// Rate and coded distortion of unit `v` at quantizer `q`, predicted
    /// from unit `v_prev` coded at `q_prev`.
    pub fn set_pred(
        &mut self,
        v: usize,
        v_prev: usize,
        q_prev: usize,
        q: usize,
        rate: S,
        dist: S,
    ) -> Result<()> {
        self.layout.check_pred(v_prev, q_prev, v, q)?;
        let i = self.layout.pred_index(v_prev, q_prev, v, q);
        self.pred_rate[i] = Some(rate);
        self.coded_dist[i] = Some(dist);
        Ok(())
    }

    pub fn set_interp(
        &mut self,
        u: usize,
        v_left: usize,
        v_right: usize,
        q_left: usize,
        q_right: usize,
        dist: S,
    ) -> Result<()> {
        self.layout.check_interp(u, v_left, v_right, q_left, q_right)?;
        let i = self.layout.interp_index(u, v_left, v_right, q_left, q_right);
        self.interp_dist[i] = Some(dist);
        Ok(())
    }

    pub fn intra(&self, q: usize) -> (Option<S>, Option<S>) {
        (self.intra_rate[q], self.intra_dist[q])
    }

    pub fn pred(&self, v: usize, v_prev: usize, q_prev: usize, q: usize) -> (Option<S>, Option<S>) {
        let i = self.layout.pred_index(v_prev, q_prev, v, q);
        (self.pred_rate[i], self.coded_dist[i])
    }

    pub fn interp(
        &self,
        u: usize,
        v_left: usize,
        v_right: usize,
        q_left: usize,
        q_right: usize,
    ) -> Option<S> {
        self.interp_dist[self.layout.interp_index(u, v_left, v_right, q_left, q_right)]
    }

    /// Freeze into a solver-ready instance, failing with every violation.
    pub fn build(self) -> Result<RdInstance<S>> {
        validate_instance(&self).map_err(Error::InvalidInstance)?;
        RdInstance::from_complete(self)
    }
}

/// Calls `f` for every pred/coded entry in canonical order
/// (v ascending, then v_prev, q_prev, q).
pub(crate) fn for_each_pred(units: usize, qn: usize, mut f: impl FnMut(usize, usize, usize, usize)) {
    for v in 2..=units {
        for v_prev in 1..v {
            for q_prev in 0..qn {
                for q in 0..qn {
                    f(v, v_prev, q_prev, q);
                }
            }
        }
    }
}

/// Calls `f` for every interpolation entry in canonical order
/// (u ascending, then v_left, v_right, q_left, q_right).
pub(crate) fn for_each_interp(
    units: usize,
    qn: usize,
    mut f: impl FnMut(usize, usize, usize, usize, usize),
) {
    for u in 2..units {
        for v_left in 1..u {
            for v_right in u + 1..=units {
                for q_left in 0..qn {
                    for q_right in 0..qn {
                        f(u, v_left, v_right, q_left, q_right);
                    }
                }
            }
        }
    }
}

/// Checks totality, nonnegativity and finiteness of every table and
/// returns all violations found.
pub fn validate_instance<S: Scalar>(tables: &RdTables<S>) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let units = tables.layout.units;
    let qn = tables.layout.qn;
    if units < 2 {
        out.push(Violation::TooFewUnits { unit_count: units });
    }
    if qn == 0 {
        out.push(Violation::NoQuantizers);
    }
    let mut seen = std::collections::BTreeSet::new();
    for &label in &tables.quantizers {
        if !seen.insert(label) {
            out.push(Violation::DuplicateQuantizer { label });
        }
    }

    let mut check = |table: TableName, entry: EntryIndex, value: Option<S>| match value {
        None => out.push(Violation::Missing { table, entry }),
        Some(x) if !x.is_finite() => out.push(Violation::NonFinite { table, entry }),
        Some(x) if x < S::zero() => out.push(Violation::Negative {
            table,
            entry,
            value: x.to_f64_lossy(),
        }),
        Some(_) => {}
    };

    for q in 0..qn {
        let entry = EntryIndex::Intra { q };
        check(TableName::IntraRate, entry, tables.intra_rate[q]);
        check(TableName::IntraDist, entry, tables.intra_dist[q]);
    }
    for_each_pred(units, qn, |v, v_prev, q_prev, q| {
        let i = tables.layout.pred_index(v_prev, q_prev, v, q);
        let entry = EntryIndex::Pred {
            v,
            v_prev,
            q_prev,
            q,
        };
        check(TableName::PredRate, entry, tables.pred_rate[i]);
        check(TableName::CodedDist, entry, tables.coded_dist[i]);
    });
    for_each_interp(units, qn, |u, v_left, v_right, q_left, q_right| {
        let i = tables.layout.interp_index(u, v_left, v_right, q_left, q_right);
        let entry = EntryIndex::Interp {
            u,
            v_left,
            v_right,
            q_left,
            q_right,
        };
        check(TableName::InterpDist, entry, tables.interp_dist[i]);
    });

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A validated, immutable rate allocation instance.
///
/// Segment distortions (interpolated units in `(v_prev, v)` plus the coded
/// unit `v`) are precomputed for every `(v_prev, q_prev, v, q)`, so the
/// instance can be shared read-only across concurrent solves.
#[derive(Debug, Clone, PartialEq)]
pub struct RdInstance<S> {
    layout: Layout,
    quantizers: Vec<i64>,
    intra_rate: Vec<S>,
    intra_dist: Vec<S>,
    pred_rate: Vec<S>,
    coded_dist: Vec<S>,
    interp_dist: Vec<S>,
    delta: Vec<S>,
}

fn unwrap_all<S: Copy>(v: Vec<Option<S>>) -> Result<Vec<S>> {
    v.into_iter()
        .map(|x| x.ok_or_else(|| Error::Format("incomplete table".into())))
        .collect()
}

impl<S: Scalar> RdInstance<S> {
    fn from_complete(t: RdTables<S>) -> Result<Self> {
        let mut inst = Self {
            intra_rate: unwrap_all(t.intra_rate)?,
            intra_dist: unwrap_all(t.intra_dist)?,
            pred_rate: unwrap_all(t.pred_rate)?,
            coded_dist: unwrap_all(t.coded_dist)?,
            interp_dist: unwrap_all(t.interp_dist)?,
            layout: t.layout,
            quantizers: t.quantizers,
            delta: Vec::new(),
        };
        let mut delta = vec![S::zero(); inst.layout.pred_len()];
        let (units, qn) = (inst.layout.units, inst.layout.qn);
        for_each_pred(units, qn, |v, v_prev, q_prev, q| {
            delta[inst.layout.pred_index(v_prev, q_prev, v, q)] =
                inst.segment_distortion_uncached(v_prev, q_prev, v, q);
        });
        inst.delta = delta;
        Ok(inst)
    }

    pub fn unit_count(&self) -> usize {
        self.layout.units
    }

    pub fn quantizer_count(&self) -> usize {
        self.layout.qn
    }

    pub fn quantizers(&self) -> &[i64] {
        &self.quantizers
    }

    #[inline]
    pub fn intra_rate(&self, q: usize) -> S {
        self.intra_rate[q]
    }

    #[inline]
    pub fn intra_dist(&self, q: usize) -> S {
        self.intra_dist[q]
    }

    /// Rate of unit `v` at `q` predicted from `v_prev` at `q_prev`.
    #[inline]
    pub fn pred_rate(&self, v_prev: usize, q_prev: usize, v: usize, q: usize) -> S {
        self.pred_rate[self.layout.pred_index(v_prev, q_prev, v, q)]
    }

    /// Distortion of the coded unit `v` alone (no interpolated units).
    #[inline]
    pub fn coded_dist(&self, v_prev: usize, q_prev: usize, v: usize, q: usize) -> S {
        self.coded_dist[self.layout.pred_index(v_prev, q_prev, v, q)]
    }

    #[inline]
    pub fn interp_dist(
        &self,
        u: usize,
        v_left: usize,
        v_right: usize,
        q_left: usize,
        q_right: usize,
    ) -> S {
        self.interp_dist[self.layout.interp_index(u, v_left, v_right, q_left, q_right)]
    }

    /// Memoized segment distortion, unchecked. See [`RdInstance::delta_segment`].
    #[inline]
    pub fn delta(&self, v_prev: usize, q_prev: usize, v: usize, q: usize) -> S {
        self.delta[self.layout.pred_index(v_prev, q_prev, v, q)]
    }

    /// Distortion of all units in `(v_prev, v]` when `v` is coded at `q`
    /// using `v_prev` at `q_prev` as predictor: the interpolated units
    /// strictly between the two, plus the coded unit itself.
    pub fn delta_segment(&self, v_prev: usize, q_prev: usize, v: usize, q: usize) -> Result<S> {
        self.layout.check_pred(v_prev, q_prev, v, q)?;
        Ok(self.delta(v_prev, q_prev, v, q))
    }

    fn segment_distortion_uncached(&self, v_prev: usize, q_prev: usize, v: usize, q: usize) -> S {
        let mut sum = S::zero();
        for u in v_prev + 1..v {
            sum = sum + self.interp_dist(u, v_prev, v, q_prev, q);
        }
        sum + self.coded_dist(v_prev, q_prev, v, q)
    }

    /// Smallest total rate of any valid solution.
    pub fn min_rate(&self) -> S {
        let (units, qn) = (self.layout.units, self.layout.qn);
        // to_go[(v - 1) * qn + q]: least rate needed to finish from unit v at q
        let mut to_go = vec![S::zero(); units * qn];
        for v in (1..units).rev() {
            for q in 0..qn {
                let mut best: Option<S> = None;
                for w in v + 1..=units {
                    for qw in 0..qn {
                        let r = self.pred_rate(v, q, w, qw) + to_go[(w - 1) * qn + qw];
                        if best.is_none_or(|b| r < b) {
                            best = Some(r);
                        }
                    }
                }
                to_go[(v - 1) * qn + q] = best.unwrap_or_else(S::zero);
            }
        }
        (0..qn)
            .map(|q| self.intra_rate(q) + to_go[q])
            .fold(None, |acc: Option<S>, r| Some(acc.map_or(r, |a| if r < a { r } else { a })))
            .unwrap_or_else(S::zero)
    }

    /// Copies the instance back into raw tables (for serialization).
    pub fn to_tables(&self) -> RdTables<S> {
        RdTables {
            layout: self.layout.clone(),
            quantizers: self.quantizers.clone(),
            intra_rate: self.intra_rate.iter().copied().map(Some).collect(),
            intra_dist: self.intra_dist.iter().copied().map(Some).collect(),
            pred_rate: self.pred_rate.iter().copied().map(Some).collect(),
            coded_dist: self.coded_dist.iter().copied().map(Some).collect(),
            interp_dist: self.interp_dist.iter().copied().map(Some).collect(),
        }
    }

    /// Converts every table entry to another scalar type.
    pub fn convert<T: Scalar>(&self, f: impl Fn(S) -> T) -> RdInstance<T> {
        let map = |v: &[S]| v.iter().map(|&x| f(x)).collect::<Vec<T>>();
        RdInstance {
            layout: self.layout.clone(),
            quantizers: self.quantizers.clone(),
            intra_rate: map(&self.intra_rate),
            intra_dist: map(&self.intra_dist),
            pred_rate: map(&self.pred_rate),
            coded_dist: map(&self.coded_dist),
            interp_dist: map(&self.interp_dist),
            delta: map(&self.delta),
        }
    }
}

/// A coded subset with its quantizer assignment and evaluated totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution<S> {
    /// Strictly increasing coded units, always starting at 1 and ending at V.
    pub units: Vec<usize>,
    /// Quantizer index per coded unit.
    pub quantizers: Vec<usize>,
    pub rate: S,
    pub distortion: S,
}

impl<S: Scalar> Solution<S> {
    pub fn evaluate(inst: &RdInstance<S>, units: Vec<usize>, quantizers: Vec<usize>) -> Result<Self> {
        let (rate, distortion) = evaluate_solution(inst, &units, &quantizers)?;
        Ok(Self {
            units,
            quantizers,
            rate,
            distortion,
        })
    }

    /// Same coded units and quantizers (totals are ignored).
    pub fn same_assignment(&self, other: &Self) -> bool {
        self.units == other.units && self.quantizers == other.quantizers
    }

    pub fn map<T>(&self, f: impl Fn(S) -> T) -> Solution<T> {
        Solution {
            units: self.units.clone(),
            quantizers: self.quantizers.clone(),
            rate: f(self.rate),
            distortion: f(self.distortion),
        }
    }
}

/// Total rate and distortion of a coded subset under the given quantizers.
pub fn evaluate_solution<S: Scalar>(
    inst: &RdInstance<S>,
    units: &[usize],
    quantizers: &[usize],
) -> Result<(S, S)> {
    let v_max = inst.unit_count();
    if units.len() != quantizers.len() {
        return Err(Error::InvalidSolution(format!(
            "{} units but {} quantizers",
            units.len(),
            quantizers.len()
        )));
    }
    if units.first() != Some(&1) || units.last() != Some(&v_max) || units.len() < 2 {
        return Err(Error::InvalidSolution(format!(
            "coded units must start at 1 and end at {v_max}: {units:?}"
        )));
    }
    if units.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSolution(format!(
            "coded units are not strictly increasing: {units:?}"
        )));
    }
    if let Some(&q) = quantizers.iter().find(|&&q| q >= inst.quantizer_count()) {
        return Err(Error::InvalidSolution(format!(
            "quantizer index {q} outside 0..{}",
            inst.quantizer_count()
        )));
    }

    let mut rate = inst.intra_rate(quantizers[0]);
    let mut dist = inst.intra_dist(quantizers[0]);
    for n in 1..units.len() {
        let (vp, qp, v, q) = (units[n - 1], quantizers[n - 1], units[n], quantizers[n]);
        rate = rate + inst.pred_rate(vp, qp, v, q);
        dist = dist + inst.delta(vp, qp, v, q);
    }
    Ok((rate, dist))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(units: usize, qn: usize) -> RdTables<f64> {
        let mut t = RdTables::new(units, (0..qn as i64).collect());
        for q in 0..qn {
            t.set_intra(q, 10.0 + q as f64, 1.0 + q as f64).unwrap();
        }
        for_each_pred(units, qn, |v, vp, qp, q| {
            let rate = (v * 7 + vp * 3 + qp + 2 * q) as f64;
            let dist = (v + vp + 5 * q + qp) as f64;
            t.set_pred(v, vp, qp, q, rate, dist).unwrap();
        });
        for_each_interp(units, qn, |u, l, r, ql, qr| {
            t.set_interp(u, l, r, ql, qr, (100 * u + 10 * (r - l) + ql + qr) as f64)
                .unwrap();
        });
        t
    }

    #[test]
    fn complete_tables_validate() {
        assert!(validate_instance(&filled(5, 3)).is_ok());
        assert!(filled(5, 3).build().is_ok());
    }

    #[test]
    fn negative_rate_is_named() {
        let mut t = filled(4, 2);
        t.set_pred(3, 1, 0, 1, -2.0, 1.0).unwrap();
        let v = validate_instance(&t).unwrap_err();
        assert_eq!(
            v,
            vec![Violation::Negative {
                table: TableName::PredRate,
                entry: EntryIndex::Pred {
                    v: 3,
                    v_prev: 1,
                    q_prev: 0,
                    q: 1
                },
                value: -2.0
            }]
        );
        assert!(v[0].to_string().contains("pred_rate"));
    }

    #[test]
    fn missing_interp_entry_is_named() {
        let mut t = filled(4, 2);
        let i = t.layout.interp_index(2, 1, 4, 1, 0);
        t.interp_dist[i] = None;
        let v = validate_instance(&t).unwrap_err();
        assert_eq!(
            v,
            vec![Violation::Missing {
                table: TableName::InterpDist,
                entry: EntryIndex::Interp {
                    u: 2,
                    v_left: 1,
                    v_right: 4,
                    q_left: 1,
                    q_right: 0
                }
            }]
        );
    }

    #[test]
    fn all_violations_are_reported() {
        let mut t: RdTables<f64> = RdTables::new(3, vec![5, 5]);
        t.set_intra(0, f64::INFINITY, -1.0).unwrap();
        let v = validate_instance(&t).unwrap_err();
        assert!(v.contains(&Violation::DuplicateQuantizer { label: 5 }));
        assert!(v.iter().any(|x| matches!(x, Violation::NonFinite { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::Negative { .. })));
        // 1 intra pair missing (2 tables), 3 pairs * 4 pred (2 tables), 4 interp
        let missing = v.iter().filter(|x| matches!(x, Violation::Missing { .. })).count();
        assert_eq!(missing, 2 + 3 * 4 * 2 + 4);
    }

    #[test]
    fn single_unit_is_rejected() {
        let t: RdTables<f64> = RdTables::new(1, vec![0]);
        let v = validate_instance(&t).unwrap_err();
        assert!(v.contains(&Violation::TooFewUnits { unit_count: 1 }));
    }

    #[test]
    fn adjacent_segment_is_coded_distortion_only() {
        let inst = filled(4, 2).build().unwrap();
        for qp in 0..2 {
            for q in 0..2 {
                assert_eq!(
                    inst.delta_segment(1, qp, 2, q).unwrap(),
                    inst.coded_dist(1, qp, 2, q)
                );
            }
        }
    }

    #[test]
    fn zero_interpolation_leaves_coded_distortion() {
        let mut t = filled(4, 2);
        for_each_interp(4, 2, |u, l, r, ql, qr| t.set_interp(u, l, r, ql, qr, 0.0).unwrap());
        let inst = t.build().unwrap();
        assert_eq!(inst.delta_segment(1, 1, 3, 0).unwrap(), inst.coded_dist(1, 1, 3, 0));
    }

    #[test]
    fn segment_sums_two_interpolated_units() {
        let inst = filled(5, 3).build().unwrap();
        let expect = inst.interp_dist(2, 1, 4, 2, 1)
            + inst.interp_dist(3, 1, 4, 2, 1)
            + inst.coded_dist(1, 2, 4, 1);
        assert_eq!(inst.delta_segment(1, 2, 4, 1).unwrap(), expect);
    }

    #[test]
    fn delta_segment_rejects_bad_indices() {
        let inst = filled(4, 2).build().unwrap();
        assert!(matches!(inst.delta_segment(3, 0, 3, 0), Err(Error::Index(_))));
        assert!(matches!(inst.delta_segment(3, 0, 2, 0), Err(Error::Index(_))));
        assert!(matches!(inst.delta_segment(1, 0, 5, 0), Err(Error::Index(_))));
        assert!(matches!(inst.delta_segment(1, 2, 2, 0), Err(Error::Index(_))));
    }

    #[test]
    fn two_unit_solution_is_two_term_sum() {
        let inst = filled(4, 2).build().unwrap();
        let (r, d) = evaluate_solution(&inst, &[1, 4], &[1, 0]).unwrap();
        assert_eq!(r, inst.intra_rate(1) + inst.pred_rate(1, 1, 4, 0));
        assert_eq!(d, inst.intra_dist(1) + inst.delta(1, 1, 4, 0));
    }

    #[test]
    fn all_coded_has_no_interpolation_terms() {
        let mut t = filled(4, 2);
        for_each_interp(4, 2, |u, l, r, ql, qr| t.set_interp(u, l, r, ql, qr, 1e6).unwrap());
        let inst = t.build().unwrap();
        let (_, d) = evaluate_solution(&inst, &[1, 2, 3, 4], &[0, 1, 0, 1]).unwrap();
        let coded = inst.intra_dist(0)
            + inst.coded_dist(1, 0, 2, 1)
            + inst.coded_dist(2, 1, 3, 0)
            + inst.coded_dist(3, 0, 4, 1);
        assert_eq!(d, coded);
    }

    #[test]
    fn invalid_solutions_are_rejected() {
        let inst = filled(4, 2).build().unwrap();
        for (u, q) in [
            (vec![2, 4], vec![0, 0]),
            (vec![1, 3], vec![0, 0]),
            (vec![1, 3, 3, 4], vec![0, 0, 0, 0]),
            (vec![1, 4], vec![0]),
            (vec![1, 4], vec![0, 2]),
            (vec![4], vec![0]),
        ] {
            assert!(matches!(
                evaluate_solution(&inst, &u, &q),
                Err(Error::InvalidSolution(_))
            ));
        }
    }
}
