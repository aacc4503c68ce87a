//! Instance generators: the knapsack reduction (instances with a known
//! optimum) and seeded synthetic rate/distortion models.
//!
//! Every generator emits integer-valued tables so that solver and oracle
//! arithmetic stays exact in `f64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{for_each_interp, for_each_pred, RdInstance, RdTables};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackItem {
    pub weight: u64,
    pub profit: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackSpec {
    pub items: Vec<KnapsackItem>,
    pub capacity: u64,
    /// Distortion of an uncoded item unit; must exceed every profit.
    /// Defaults to `1 + max profit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_distortion: Option<u64>,
}

impl KnapsackSpec {
    pub fn new(items: impl IntoIterator<Item = (u64, u64)>, capacity: u64) -> Self {
        Self {
            items: items
                .into_iter()
                .map(|(weight, profit)| KnapsackItem { weight, profit })
                .collect(),
            capacity,
            base_distortion: None,
        }
    }

    pub fn base(&self) -> u64 {
        self.base_distortion
            .unwrap_or_else(|| 1 + self.items.iter().map(|i| i.profit).max().unwrap_or(0))
    }

    pub fn validate(&self) -> Result<()> {
        let base = self.base();
        if let Some(i) = self.items.iter().find(|i| i.profit >= base) {
            return Err(Error::InvalidArgument(format!(
                "base distortion {base} must exceed every profit (found {})",
                i.profit
            )));
        }
        Ok(())
    }

    /// Distortion of the instance when the knapsack optimum `best_profit`
    /// is coded: `M * D_k - C*`.
    pub fn distortion_for(&self, best_profit: u64) -> u64 {
        self.items.len() as u64 * self.base() - best_profit
    }

    /// Random spec with `items` items, weights in `1..=max_weight`, profits
    /// in `0..=max_profit` and a capacity around half the total weight.
    pub fn random(items: usize, max_weight: u64, max_profit: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items: Vec<_> = (0..items)
            .map(|_| (rng.gen_range(1..=max_weight), rng.gen_range(0..=max_profit)))
            .collect();
        let total: u64 = items.iter().map(|i| i.0).sum();
        let capacity = rng.gen_range(0..=total.max(1));
        Self::new(items, capacity)
    }
}

/// Builds the knapsack reduction: `M + 2` units, one quantizer.
///
/// The boundary units cost one rate unit each (intra for unit 1,
/// predictive for unit V) at zero distortion. Item `m` is unit `m + 1`;
/// coding it costs its weight and leaves distortion `D_k - c_m` whatever the
/// predictor, and leaving it uncoded costs `D_k` whatever the references.
/// Returns the instance and the budget `W + 2`.
pub fn gen_knapsack_instance<S: Scalar>(spec: &KnapsackSpec) -> Result<(RdInstance<S>, S)> {
    spec.validate()?;
    let m = spec.items.len();
    let units = m + 2;
    let base = spec.base();
    let mut t = RdTables::new(units, vec![0]);
    t.set_intra(0, S::one(), S::zero())?;
    for v in 2..=units {
        let (rate, dist) = if v == units {
            (1, 0)
        } else {
            let item = spec.items[v - 2];
            (item.weight, base - item.profit)
        };
        for v_prev in 1..v {
            t.set_pred(v, v_prev, 0, 0, S::from_count(rate), S::from_count(dist))?;
        }
    }
    for_each_interp(units, 1, |u, l, r, _, _| {
        t.set_interp(u, l, r, 0, 0, S::from_count(base))
            .expect("indices come from the layout");
    });
    Ok((t.build()?, S::from_count(spec.capacity + 2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Rate halves per quantizer step while distortion grows linearly.
    Convex,
    /// `Convex` with seeded multiplicative noise, producing off-hull points.
    Perturbed,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" => Ok(Profile::Convex),
            "perturbed" => Ok(Profile::Perturbed),
            _ => Err(Error::InvalidArgument(format!("unknown profile `{s}`"))),
        }
    }
}

/// Seeded synthetic instance with exponential rate curves.
///
/// Quantizer index 0 is the finest. Predicting across a longer gap or from
/// a coarser predictor costs more bits, and interpolation distortion grows
/// with the distance between the two references.
pub fn gen_synthetic<S: Scalar>(
    unit_count: usize,
    quantizer_count: usize,
    seed: u64,
    profile: Profile,
) -> Result<RdInstance<S>> {
    if unit_count < 2 || quantizer_count == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 units and 1 quantizer, got {unit_count} and {quantizer_count}"
        )));
    }
    if quantizer_count > 40 {
        return Err(Error::InvalidArgument(
            "at most 40 quantizers keep halved rates exact".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qn = quantizer_count;
    let scale = (1u64 << (qn - 1)) as f64;
    let base_rate: Vec<f64> = (0..=unit_count)
        .map(|_| rng.gen_range(1000..=2000) as f64 * scale)
        .collect();
    let base_dist: Vec<f64> = (0..=unit_count).map(|_| rng.gen_range(20..=40) as f64).collect();
    let step: Vec<f64> = (0..=unit_count).map(|_| rng.gen_range(3..=8) as f64).collect();
    let interp_base: Vec<f64> = (0..=unit_count).map(|_| rng.gen_range(30..=60) as f64).collect();

    let rate_at = |v: usize, q: usize| base_rate[v] / (1u64 << q) as f64;
    let dist_at = |v: usize, q: usize| base_dist[v] + step[v] * q as f64;

    let mut noise = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        move |x: f64| match profile {
            Profile::Convex => x.round(),
            Profile::Perturbed => (x * rng.gen_range(0.85..1.15)).round().max(0.0),
        }
    };

    let mut t = RdTables::new(unit_count, (0..qn as i64).map(|k| 22 + k).collect());
    for q in 0..qn {
        let r = noise(2.0 * rate_at(1, q));
        let d = noise(dist_at(1, q));
        t.set_intra(q, S::from_f64_lossy(r), S::from_f64_lossy(d))?;
    }
    let mut entries = Vec::new();
    for_each_pred(unit_count, qn, |v, v_prev, q_prev, q| {
        let gap = (v - v_prev) as f64;
        let rate = rate_at(v, q) * (1.0 + 0.25 * (gap - 1.0)) * (1.0 + 0.05 * q_prev as f64);
        let dist = dist_at(v, q) + (q_prev / 2) as f64;
        entries.push((v, v_prev, q_prev, q, rate, dist));
    });
    for (v, v_prev, q_prev, q, rate, dist) in entries {
        let (r, d) = (noise(rate), noise(dist));
        t.set_pred(v, v_prev, q_prev, q, S::from_f64_lossy(r), S::from_f64_lossy(d))?;
    }
    let mut entries = Vec::new();
    for_each_interp(unit_count, qn, |u, l, r, ql, qr| {
        let gap = (r - l) as f64;
        let dist = interp_base[u] * gap / 2.0 + step[u] * (ql + qr) as f64 / 2.0;
        entries.push((u, l, r, ql, qr, dist));
    });
    for (u, l, r, ql, qr, dist) in entries {
        t.set_interp(u, l, r, ql, qr, S::from_f64_lossy(noise(dist)))?;
    }
    t.build()
}

/// Seeded instance with independent uniform integer entries: rates in
/// `0..=max_rate`, distortions in `0..=max_dist`. No structure at all,
/// which makes it a good adversary for the solvers.
pub fn gen_uniform<S: Scalar>(
    unit_count: usize,
    quantizer_count: usize,
    seed: u64,
    max_rate: u64,
    max_dist: u64,
) -> Result<RdInstance<S>> {
    if unit_count < 2 || quantizer_count == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 units and 1 quantizer, got {unit_count} and {quantizer_count}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qn = quantizer_count;
    let mut t = RdTables::new(unit_count, (0..qn as i64).collect());
    let mut draw = |hi: u64| S::from_count(rng.gen_range(0..=hi));
    for q in 0..qn {
        let (r, d) = (draw(max_rate), draw(max_dist));
        t.set_intra(q, r, d)?;
    }
    let mut pred = Vec::new();
    for_each_pred(unit_count, qn, |v, vp, qp, q| pred.push((v, vp, qp, q)));
    for (v, vp, qp, q) in pred {
        let (r, d) = (draw(max_rate), draw(max_dist));
        t.set_pred(v, vp, qp, q, r, d)?;
    }
    let mut interp = Vec::new();
    for_each_interp(unit_count, qn, |u, l, r, ql, qr| interp.push((u, l, r, ql, qr)));
    for (u, l, r, ql, qr) in interp {
        let d = draw(max_dist);
        t.set_interp(u, l, r, ql, qr, d)?;
    }
    t.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate_solution;

    #[test]
    fn empty_knapsack_is_two_units() {
        let (inst, budget) = gen_knapsack_instance::<f64>(&KnapsackSpec::new([], 0)).unwrap();
        assert_eq!(inst.unit_count(), 2);
        assert_eq!(budget, 2.0);
        assert_eq!(evaluate_solution(&inst, &[1, 2], &[0, 0]).unwrap(), (2.0, 0.0));
    }

    #[test]
    fn boundary_only_costs_rate_two() {
        let spec = KnapsackSpec::new([(3, 5), (4, 6), (1, 2)], 4);
        let (inst, budget) = gen_knapsack_instance::<f64>(&spec).unwrap();
        assert_eq!(inst.unit_count(), 5);
        assert_eq!(budget, 6.0);
        assert_eq!(spec.base(), 7);
        let (r, d) = evaluate_solution(&inst, &[1, 5], &[0; 2]).unwrap();
        assert_eq!((r, d), (2.0, 3.0 * 7.0));
        let (r, d) = evaluate_solution(&inst, &[1, 3, 5], &[0; 3]).unwrap();
        assert_eq!((r, d), (2.0 + 4.0, 2.0 * 7.0 + 1.0));
    }

    #[test]
    fn knapsack_rejects_small_base() {
        let mut spec = KnapsackSpec::new([(3, 5)], 4);
        spec.base_distortion = Some(5);
        assert!(gen_knapsack_instance::<f64>(&spec).is_err());
    }

    #[test]
    fn synthetic_is_deterministic() {
        for profile in [Profile::Convex, Profile::Perturbed] {
            let a: RdInstance<f64> = gen_synthetic(6, 4, 42, profile).unwrap();
            let b: RdInstance<f64> = gen_synthetic(6, 4, 42, profile).unwrap();
            assert_eq!(a, b);
        }
        let a: RdInstance<f64> = gen_synthetic(6, 4, 42, Profile::Perturbed).unwrap();
        let c: RdInstance<f64> = gen_synthetic(6, 4, 43, Profile::Perturbed).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn minimal_synthetic_has_one_solution_shape() {
        let inst: RdInstance<f64> = gen_synthetic(2, 1, 5, Profile::Convex).unwrap();
        assert_eq!(inst.unit_count(), 2);
        assert_eq!(inst.quantizer_count(), 1);
        assert!(evaluate_solution(&inst, &[1, 2], &[0, 0]).is_ok());
    }

    #[test]
    fn synthetic_entries_are_integers() {
        let inst: RdInstance<f64> = gen_synthetic(5, 3, 9, Profile::Perturbed).unwrap();
        let t = inst.to_tables();
        for_each_pred(5, 3, |v, vp, qp, q| {
            let (r, d) = t.pred(v, vp, qp, q);
            assert_eq!(r.unwrap().fract(), 0.0);
            assert_eq!(d.unwrap().fract(), 0.0);
        });
    }

    #[test]
    fn convex_rates_halve_and_interp_grows_with_gap() {
        let inst: RdInstance<f64> = gen_synthetic(6, 3, 1, Profile::Convex).unwrap();
        let r0 = inst.pred_rate(2, 0, 3, 0);
        let r1 = inst.pred_rate(2, 0, 3, 1);
        assert!((r0 / r1 - 2.0).abs() < 1e-6);
        assert!(inst.interp_dist(3, 1, 5, 0, 0) > inst.interp_dist(3, 2, 4, 0, 0));
    }

    #[test]
    fn bad_sizes_are_rejected() {
        assert!(gen_synthetic::<f64>(1, 2, 0, Profile::Convex).is_err());
        assert!(gen_synthetic::<f64>(3, 0, 0, Profile::Convex).is_err());
        assert!(gen_synthetic::<f64>(3, 41, 0, Profile::Convex).is_err());
        assert!(gen_uniform::<f64>(1, 2, 0, 5, 5).is_err());
    }
}
