//! JSON instance file format.
//!
//! ```json
//! {
//!   "unit_count": 3,
//!   "quantizers": [22, 27],
//!   "intra": { "rate": [..], "dist": [..] },
//!   "pred":   [ { "v": 2, "v_prev": 1, "q_prev_idx": 0, "q_idx": 1, "rate": 4.0, "dist": 2.0 }, .. ],
//!   "interp": [ { "u": 2, "v_left": 1, "v_right": 3, "q_left_idx": 0, "q_right_idx": 0, "dist": 3.0 }, .. ]
//! }
//! ```
//!
//! Units are 1-based, quantizer indices refer to positions in `quantizers`.
//! `pred` and `interp` may instead be dense nested arrays:
//!
//! * `pred: { "rate": R, "dist": D }` with `R[v-2][v_prev-1][q_prev][q]`
//! * `interp: { "dist": D }` with `D[v_left-1][v_right-v_left-2][u-v_left-1][q_left][q_right]`

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{for_each_interp, for_each_pred, RdInstance, RdTables};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableLayout {
    #[default]
    Records,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub unit_count: usize,
    pub quantizers: Vec<i64>,
    pub intra: IntraTable,
    pub pred: PredTable,
    pub interp: InterpTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntraTable {
    pub rate: Vec<f64>,
    pub dist: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredRecord {
    pub v: usize,
    pub v_prev: usize,
    pub q_prev_idx: usize,
    pub q_idx: usize,
    pub rate: f64,
    pub dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpRecord {
    pub u: usize,
    pub v_left: usize,
    pub v_right: usize,
    pub q_left_idx: usize,
    pub q_right_idx: usize,
    pub dist: f64,
}

type Nested4 = Vec<Vec<Vec<Vec<f64>>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredTable {
    Records(Vec<PredRecord>),
    Dense { rate: Nested4, dist: Nested4 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InterpTable {
    Records(Vec<InterpRecord>),
    Dense { dist: Vec<Nested4> },
}

fn shape_err(what: &str) -> Error {
    Error::Format(format!("dense {what} table has the wrong shape"))
}

fn dense_get<'a, T>(v: &'a [T], i: usize, what: &str) -> Result<&'a T> {
    v.get(i).ok_or_else(|| shape_err(what))
}

impl InstanceFile {
    pub fn from_tables<S: Scalar>(t: &RdTables<S>, layout: TableLayout) -> Result<Self> {
        let units = t.unit_count();
        let qn = t.quantizers().len();
        let need = |x: Option<S>| {
            x.map(S::to_f64_lossy)
                .ok_or_else(|| Error::Format("dense layout requires complete tables".into()))
        };
        let mut intra = IntraTable {
            rate: Vec::with_capacity(qn),
            dist: Vec::with_capacity(qn),
        };
        for q in 0..qn {
            let (r, d) = t.intra(q);
            intra.rate.push(need(r)?);
            intra.dist.push(need(d)?);
        }

        let mut failure = None;
        let (pred, interp) = match layout {
            TableLayout::Records => {
                let mut pred = Vec::new();
                for_each_pred(units, qn, |v, v_prev, q_prev, q| {
                    if let (Some(rate), Some(dist)) = t.pred(v, v_prev, q_prev, q) {
                        pred.push(PredRecord {
                            v,
                            v_prev,
                            q_prev_idx: q_prev,
                            q_idx: q,
                            rate: rate.to_f64_lossy(),
                            dist: dist.to_f64_lossy(),
                        });
                    }
                });
                let mut interp = Vec::new();
                for_each_interp(units, qn, |u, v_left, v_right, q_left, q_right| {
                    if let Some(dist) = t.interp(u, v_left, v_right, q_left, q_right) {
                        interp.push(InterpRecord {
                            u,
                            v_left,
                            v_right,
                            q_left_idx: q_left,
                            q_right_idx: q_right,
                            dist: dist.to_f64_lossy(),
                        });
                    }
                });
                (PredTable::Records(pred), InterpTable::Records(interp))
            }
            TableLayout::Dense => {
                let mut rate = vec![];
                let mut dist = vec![];
                for v in 2..=units {
                    let mut rv = vec![];
                    let mut dv = vec![];
                    for v_prev in 1..v {
                        let mut rp = vec![vec![0.0; qn]; qn];
                        let mut dp = vec![vec![0.0; qn]; qn];
                        for q_prev in 0..qn {
                            for q in 0..qn {
                                match t.pred(v, v_prev, q_prev, q) {
                                    (Some(r), Some(d)) => {
                                        rp[q_prev][q] = r.to_f64_lossy();
                                        dp[q_prev][q] = d.to_f64_lossy();
                                    }
                                    _ => failure = Some(shape_err("pred")),
                                }
                            }
                        }
                        rv.push(rp);
                        dv.push(dp);
                    }
                    rate.push(rv);
                    dist.push(dv);
                }
                let mut idist = vec![];
                for v_left in 1..=units.saturating_sub(2) {
                    let mut by_right = vec![];
                    for v_right in v_left + 2..=units {
                        let mut by_u = vec![];
                        for u in v_left + 1..v_right {
                            let mut m = vec![vec![0.0; qn]; qn];
                            for (q_left, row) in m.iter_mut().enumerate() {
                                for (q_right, cell) in row.iter_mut().enumerate() {
                                    match t.interp(u, v_left, v_right, q_left, q_right) {
                                        Some(d) => *cell = d.to_f64_lossy(),
                                        None => failure = Some(shape_err("interp")),
                                    }
                                }
                            }
                            by_u.push(m);
                        }
                        by_right.push(by_u);
                    }
                    idist.push(by_right);
                }
                (
                    PredTable::Dense { rate, dist },
                    InterpTable::Dense { dist: idist },
                )
            }
        };
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Self {
            unit_count: units,
            quantizers: t.quantizers().to_vec(),
            intra,
            pred,
            interp,
        })
    }

    pub fn from_instance<S: Scalar>(inst: &RdInstance<S>, layout: TableLayout) -> Result<Self> {
        Self::from_tables(&inst.to_tables(), layout)
    }

    pub fn layout(&self) -> TableLayout {
        match self.pred {
            PredTable::Dense { .. } => TableLayout::Dense,
            PredTable::Records(_) => TableLayout::Records,
        }
    }

    /// Raw tables; entries absent from a records-layout file stay missing
    /// so that [`crate::validate_instance`] can report them.
    pub fn to_tables<S: Scalar>(&self) -> Result<RdTables<S>> {
        let units = self.unit_count;
        let qn = self.quantizers.len();
        let mut t = RdTables::new(units, self.quantizers.clone());
        if self.intra.rate.len() != qn || self.intra.dist.len() != qn {
            return Err(Error::Format(format!(
                "intra tables must have one entry per quantizer ({qn})"
            )));
        }
        for q in 0..qn {
            t.set_intra(
                q,
                S::from_f64_lossy(self.intra.rate[q]),
                S::from_f64_lossy(self.intra.dist[q]),
            )?;
        }

        match &self.pred {
            PredTable::Records(recs) => {
                for r in recs {
                    let valid = r.v_prev >= 1
                        && r.v_prev < r.v
                        && r.v <= units
                        && r.q_prev_idx < qn
                        && r.q_idx < qn;
                    if valid && t.pred(r.v, r.v_prev, r.q_prev_idx, r.q_idx).0.is_some() {
                        return Err(Error::Format(format!(
                            "duplicate pred record (v={}, v_prev={}, q_prev_idx={}, q_idx={})",
                            r.v, r.v_prev, r.q_prev_idx, r.q_idx
                        )));
                    }
                    t.set_pred(
                        r.v,
                        r.v_prev,
                        r.q_prev_idx,
                        r.q_idx,
                        S::from_f64_lossy(r.rate),
                        S::from_f64_lossy(r.dist),
                    )
                    .map_err(|e| Error::Format(format!("pred record: {e}")))?;
                }
            }
            PredTable::Dense { rate, dist } => {
                if rate.len() != units.saturating_sub(1) || dist.len() != rate.len() {
                    return Err(shape_err("pred"));
                }
                let mut res = Ok(());
                for_each_pred(units, qn, |v, v_prev, q_prev, q| {
                    let cell = |tab: &Nested4| -> Result<f64> {
                        let a = dense_get(tab, v - 2, "pred")?;
                        let b = dense_get(a, v_prev - 1, "pred")?;
                        let c = dense_get(b, q_prev, "pred")?;
                        Ok(*dense_get(c, q, "pred")?)
                    };
                    let r = cell(rate).and_then(|r| cell(dist).map(|d| (r, d))).and_then(
                        |(r, d)| {
                            t.set_pred(
                                v,
                                v_prev,
                                q_prev,
                                q,
                                S::from_f64_lossy(r),
                                S::from_f64_lossy(d),
                            )
                        },
                    );
                    if res.is_ok() {
                        res = r;
                    }
                });
                res?;
            }
        }

        match &self.interp {
            InterpTable::Records(recs) => {
                for r in recs {
                    let valid = r.v_left >= 1
                        && r.v_left < r.u && r.u < r.v_right && r.v_right <= units;
                    if valid
                        && r.q_left_idx < qn
                        && r.q_right_idx < qn
                        && t.interp(r.u, r.v_left, r.v_right, r.q_left_idx, r.q_right_idx)
                            .is_some()
                    {
                        return Err(Error::Format(format!(
                            "duplicate interp record (u={}, v_left={}, v_right={}, q_left_idx={}, q_right_idx={})",
                            r.u, r.v_left, r.v_right, r.q_left_idx, r.q_right_idx
                        )));
                    }
                    t.set_interp(
                        r.u,
                        r.v_left,
                        r.v_right,
                        r.q_left_idx,
                        r.q_right_idx,
                        S::from_f64_lossy(r.dist),
                    )
                    .map_err(|e| Error::Format(format!("interp record: {e}")))?;
                }
            }
            InterpTable::Dense { dist } => {
                if dist.len() != units.saturating_sub(2) {
                    return Err(shape_err("interp"));
                }
                let mut res = Ok(());
                for_each_interp(units, qn, |u, v_left, v_right, q_left, q_right| {
                    let cell = || -> Result<f64> {
                        let a = dense_get(dist, v_left - 1, "interp")?;
                        let b = dense_get(a, v_right - v_left - 2, "interp")?;
                        let c = dense_get(b, u - v_left - 1, "interp")?;
                        let d = dense_get(c, q_left, "interp")?;
                        Ok(*dense_get(d, q_right, "interp")?)
                    };
                    let r = cell().and_then(|d| {
                        t.set_interp(u, v_left, v_right, q_left, q_right, S::from_f64_lossy(d))
                    });
                    if res.is_ok() {
                        res = r;
                    }
                });
                res?;
            }
        }
        Ok(t)
    }

    pub fn to_instance<S: Scalar>(&self) -> Result<RdInstance<S>> {
        self.to_tables()?.build()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Reads and validates an instance file.
pub fn load_instance<S: Scalar>(path: impl AsRef<Path>) -> Result<RdInstance<S>> {
    InstanceFile::read(path)?.to_instance()
}

pub fn save_instance<S: Scalar>(
    inst: &RdInstance<S>,
    path: impl AsRef<Path>,
    layout: TableLayout,
) -> Result<()> {
    InstanceFile::from_instance(inst, layout)?.write(path)
}
