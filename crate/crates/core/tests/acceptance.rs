//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Tolerances are fixed here and nowhere else:
//! * distortion and cost comparisons are exact (`==`) on integer tables;
//! * criterion 1 suite time limit: 60 s;
//! * criterion 10 search time limit: 5 s; complexity fit band: 3x.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rdalloc::oracle::{brute_force, convex_hull_sweep, knapsack_solve, lagrangian_brute, DEFAULT_ENUM_CAP};
use rdalloc::*;

const SUITE_TIME_LIMIT: Duration = Duration::from_secs(60);
const SCALE_TIME_LIMIT: Duration = Duration::from_secs(5);
const FIT_BAND: f64 = 3.0;
const LAMBDAS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 10.0];
const SWEEP_TOP: i64 = 1_000_000;

type Q = Rational64;

fn q(x: f64) -> Q {
    Q::from_f64_lossy(x)
}

/// Criterion-1 instance set: V in 3..=6, Q in {2, 3}, integer tables.
fn suite_instances() -> Vec<(String, Instance, f64)> {
    let mut out = Vec::new();
    for i in 0..240u64 {
        let units = 3 + (i % 4) as usize;
        let qn = 2 + ((i / 4) % 2) as usize;
        let inst = if i % 3 == 2 {
            gen_synthetic(units, qn, i, Profile::Perturbed).unwrap()
        } else {
            gen_uniform(units, qn, 10_000 + i, 12, 20).unwrap()
        };
        let lo = inst.min_rate();
        let hi = solve_lagrangian(&inst, 0.0).unwrap().1.rate;
        // budgets spread between the minimum rate and the distortion-optimal rate
        let budget = (lo + (hi - lo) * ((i % 7) as f64) / 6.0).round();
        out.push((format!("case {i} (V={units}, Q={qn})"), inst, budget));
    }
    out
}

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct MoveStats {
    moves: usize,
    update_failures: Vec<String>,
    lemma_checks: usize,
    lemma_failures: Vec<String>,
}

impl MoveStats {
    fn search<S: Scalar>(&mut self, name: &str, r: &Result<SearchResult<S>>) {
        match r {
            Ok(r) => {
                for e in r.trace.iter().filter(|e| e.phase == Phase::Fine) {
                    self.moves += 1;
                    self.lemma_checks += 1;
                    if e.lemma1 != Some(true) {
                        self.lemma_failures.push(format!("{name} at lambda {}", e.lambda));
                    }
                }
            }
            Err(Error::Consistency(m)) => self.update_failures.push(format!("{name}: {m}")),
            Err(_) => {}
        }
    }

    fn sweep<S: Scalar>(&mut self, name: &str, r: &Result<Staircase<S>>) {
        match r {
            Ok(st) => {
                self.moves += st.moves;
                self.lemma_checks += st.lemma1.len();
                for (k, ok) in st.lemma1.iter().enumerate() {
                    if !ok {
                        self.lemma_failures.push(format!("{name} move {k}"));
                    }
                }
            }
            Err(Error::Consistency(m)) => self.update_failures.push(format!("{name}: {m}")),
            Err(_) => {}
        }
    }
}

fn checked_search<S: Scalar>() -> SearchConfig<S> {
    SearchConfig {
        verify_updates: true,
        check_lemma1: true,
        ..SearchConfig::default()
    }
}

fn checked_sweep() -> SweepConfig {
    SweepConfig {
        verify_updates: true,
        check_lemma1: true,
        ..SweepConfig::default()
    }
}

fn first(v: &[String]) -> String {
    v.first().cloned().unwrap_or_default()
}

fn criterion1(set: &[(String, Instance, f64)]) -> Line {
    let start = Instant::now();
    let mut bad = Vec::new();
    for (name, inst, budget) in set {
        let dp = solve_constrained(inst, *budget, 1.0).unwrap();
        let bf = brute_force(inst, *budget).unwrap();
        if dp.distortion != bf.distortion {
            bad.push(format!("{name}: {} vs {}", dp.distortion, bf.distortion));
        }
    }
    let elapsed = start.elapsed();
    Line {
        id: 1,
        title: "oracle equivalence, constrained",
        pass: bad.is_empty() && elapsed < SUITE_TIME_LIMIT,
        detail: format!(
            "{}/{} exact matches, {:.2} s (limit {} s) {}",
            set.len() - bad.len(),
            set.len(),
            elapsed.as_secs_f64(),
            SUITE_TIME_LIMIT.as_secs(),
            first(&bad)
        ),
    }
}

fn criterion2(set: &[(String, Instance, f64)]) -> Line {
    let mut bad = Vec::new();
    let mut total = 0;
    for (name, inst, _) in set {
        for lambda in LAMBDAS {
            total += 1;
            let (_, s) = solve_lagrangian(inst, lambda).unwrap();
            let bf = lagrangian_brute(inst, lambda).unwrap();
            let (a, b) = (lagrangian_cost(&s, lambda), lagrangian_cost(&bf, lambda));
            if a != b {
                bad.push(format!("{name} lambda {lambda}: {a} vs {b}"));
            }
        }
    }
    Line {
        id: 2,
        title: "oracle equivalence, Lagrangian",
        pass: bad.is_empty(),
        detail: format!("{}/{} exact cost matches {}", total - bad.len(), total, first(&bad)),
    }
}

fn knapsack_specs() -> Vec<KnapsackSpec> {
    (0..60u64)
        .map(|s| KnapsackSpec::random(1 + (s % 12) as usize, 10, 20, 500 + s))
        .collect()
}

fn criterion3() -> Line {
    let specs = knapsack_specs();
    let mut dp_bad = Vec::new();
    let mut search_bad = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let (inst, budget) = gen_knapsack_instance::<f64>(spec).unwrap();
        let target = spec.distortion_for(knapsack_solve(spec)) as f64;
        let dp = solve_constrained(&inst, budget, 1.0).unwrap();
        if dp.distortion != target {
            dp_bad.push(format!("spec {k}: dp {} vs {target}", dp.distortion));
        }
        let r = search_optimal_multiplier(&inst, budget, &SearchConfig::default()).unwrap();
        if r.lower.distortion != target {
            search_bad.push(format!(
                "spec {k} (M={}): search {} vs {target}, bound {}",
                spec.items.len(),
                r.lower.distortion,
                r.bound
            ));
        }
    }
    let n = specs.len();
    Line {
        id: 3,
        title: "knapsack reduction",
        pass: dp_bad.is_empty() && search_bad.is_empty(),
        detail: format!(
            "constrained {}/{n}, search {}/{n} exact {}",
            n - dp_bad.len(),
            n - search_bad.len(),
            [first(&dp_bad), first(&search_bad)].join(" ")
        ),
    }
}

fn sandwich<S: Scalar>(r: &SearchResult<S>, budget: S, optimum: S) -> bool {
    r.lower.rate <= budget
        && (budget <= r.upper.rate || r.lower == r.upper)
        && r.upper.distortion <= optimum
        && optimum <= r.lower.distortion
        && (r.lower.distortion - optimum).abs() <= (r.lower.distortion - r.upper.distortion).abs()
}

fn criterion4(set: &[(String, Instance, f64)], stats: &mut MoveStats) -> Line {
    let mut bad = Vec::new();
    for (name, inst, budget) in set {
        let bf = brute_force(inst, *budget).unwrap();
        let rf = search_optimal_multiplier(inst, *budget, &checked_search());
        stats.search(name, &rf);
        let exact = inst.convert(q);
        let rq = search_optimal_multiplier(&exact, q(*budget), &checked_search());
        stats.search(name, &rq);
        match (&rf, &rq) {
            (Ok(rf), Ok(rq)) => {
                if !sandwich(rf, *budget, bf.distortion) || !sandwich(rq, q(*budget), q(bf.distortion)) {
                    bad.push(format!(
                        "{name}: budget {budget}, lower ({}, {}), upper ({}, {}), optimum {}",
                        rf.lower.rate, rf.lower.distortion, rf.upper.rate, rf.upper.distortion, bf.distortion
                    ));
                }
            }
            (Err(e), _) | (_, Err(e)) => bad.push(format!("{name}: {e}")),
        }
    }
    Line {
        id: 4,
        title: "bracketing and bound",
        pass: bad.is_empty(),
        detail: format!(
            "{}/{} instances bracketed and bounded (f64 and exact rational) {}",
            set.len() - bad.len(),
            set.len(),
            first(&bad)
        ),
    }
}

fn criterion5(stats: &mut MoveStats) -> Line {
    let mut bad = Vec::new();
    let mut total = 0;
    for (k, spec) in knapsack_specs().iter().enumerate() {
        let (inst, _) = gen_knapsack_instance::<f64>(spec).unwrap();
        // every distinct Lagrangian rate on a multiplier grid becomes a budget
        let mut budgets: Vec<f64> = (0..=40).map(|j| solve_lagrangian(&inst, j as f64 * 0.25).unwrap().1.rate).collect();
        budgets.sort_by(f64::total_cmp);
        budgets.dedup();
        for b in budgets {
            total += 1;
            let name = format!("spec {k} budget {b}");
            let r = search_optimal_multiplier(&inst, b, &checked_search());
            stats.search(&name, &r);
            let optimum = brute_force(&inst, b).unwrap().distortion;
            match r {
                Ok(r) if r.lower.distortion == optimum && r.lower.rate <= b => {}
                Ok(r) => bad.push(format!("{name}: search {} vs optimum {optimum}", r.lower.distortion)),
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
    }
    Line {
        id: 5,
        title: "exact-budget optimality",
        pass: bad.is_empty(),
        detail: format!("{}/{} attainable budgets solved optimally {}", total - bad.len(), total, first(&bad)),
    }
}

fn pairs<S: Scalar + Ord>(rows: impl IntoIterator<Item = (S, S)>) -> Vec<(S, S)> {
    let mut v: Vec<_> = rows.into_iter().collect();
    v.sort();
    v.dedup();
    v
}

fn criterion6(set: &[(String, Instance, f64)], stats: &mut MoveStats, staircases: &mut Vec<Vec<u8>>) -> Line {
    let mut bad = Vec::new();
    let picked: Vec<_> = set.iter().step_by(4).collect();
    let (zero, top) = (Q::from_integer(0), Q::from_integer(SWEEP_TOP));
    for (name, inst, _) in &picked {
        let exact = inst.convert(q);
        let st = sweep(&exact, zero, top, &checked_sweep());
        stats.sweep(name, &st);
        let fst = sweep(inst, 0.0, SWEEP_TOP as f64, &checked_sweep());
        stats.sweep(name, &fst);
        let (st, fst) = match (st, fst) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                bad.push(format!("{name}: {e}"));
                continue;
            }
        };
        let mut csv = Vec::new();
        write_staircase_csv(&fst.rows, &mut csv).unwrap();
        staircases.push(csv);
        let ours = pairs(st.rows.iter().flat_map(|r| {
            [(r.rate_lower, r.distortion_lower), (r.rate_upper, r.distortion_upper)]
        }));
        let hull = pairs(
            convex_hull_sweep(&exact, zero, top, Q::from_integer(1), DEFAULT_ENUM_CAP)
                .unwrap()
                .into_iter()
                .map(|p| (p.rate, p.distortion)),
        );
        let float_pairs: Vec<(Q, Q)> = pairs(fst.rows.iter().flat_map(|r| {
            [(q(r.rate_lower), q(r.distortion_lower)), (q(r.rate_upper), q(r.distortion_upper))]
        }));
        if ours != hull || float_pairs != hull {
            bad.push(format!("{name}: marching {ours:?} vs hull {hull:?}"));
        }
    }
    Line {
        id: 6,
        title: "singular-value completeness",
        pass: bad.is_empty() && picked.len() >= 50,
        detail: format!(
            "{}/{} staircases equal the dense-grid plateau set {}",
            picked.len() - bad.len(),
            picked.len(),
            first(&bad)
        ),
    }
}

fn criterion7(stats: &MoveStats) -> Line {
    Line {
        id: 7,
        title: "incremental-update soundness",
        pass: stats.update_failures.is_empty() && stats.moves > 0,
        detail: format!(
            "{} moves checked bitwise against full solves, {} divergent {}",
            stats.moves,
            stats.update_failures.len(),
            first(&stats.update_failures)
        ),
    }
}

fn criterion8(stats: &MoveStats) -> Line {
    Line {
        id: 8,
        title: "tie at every move",
        pass: stats.lemma_failures.is_empty() && stats.lemma_checks > 0,
        detail: format!(
            "{}/{} moves tie old and new choice {}",
            stats.lemma_checks - stats.lemma_failures.len(),
            stats.lemma_checks,
            first(&stats.lemma_failures)
        ),
    }
}

fn criterion9(staircases: &[Vec<u8>]) -> Line {
    let mut bad = 0;
    for csv in staircases {
        let mut rd = ::csv::Reader::from_reader(csv.as_slice());
        let rows: Vec<Vec<f64>> = rd
            .records()
            .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
            .collect();
        // ascending multiplier, each row's lower rate <= upper rate, and the
        // upper rate of a row never exceeds the lower rate of the previous one
        let ok = rows.windows(2).all(|w| w[0][0] < w[1][0] && w[1][2] <= w[0][1])
            && rows.iter().all(|r| r[1] <= r[2]);
        if !ok {
            bad += 1;
        }
    }
    Line {
        id: 9,
        title: "staircase monotonicity",
        pass: bad == 0 && !staircases.is_empty(),
        detail: format!("{}/{} CSV staircases non-increasing", staircases.len() - bad, staircases.len()),
    }
}

fn scale_run(units: usize) -> (SearchResult<f64>, Duration) {
    let inst = gen_synthetic::<f64>(units, 27, 30 + units as u64, Profile::Perturbed).unwrap();
    let lo = inst.min_rate();
    let hi = solve_lagrangian(&inst, 0.0).unwrap().1.rate;
    let budget = ((lo + hi) / 2.0).round();
    let start = Instant::now();
    let r = search_optimal_multiplier(&inst, budget, &SearchConfig::default()).unwrap();
    (r, start.elapsed())
}

fn criterion10() -> Line {
    let qn = 27.0f64;
    let mut points = Vec::new();
    let mut big = Duration::ZERO;
    let mut m30 = 0;
    for units in [10usize, 20, 30] {
        let (r, t) = scale_run(units);
        // one table pass (full solve, or candidate scan plus update) per step
        let steps = (r.coarse_evaluations + 2 * r.iterations + 1) as f64;
        let model = steps * (units as f64).powi(2) * qn * qn;
        points.push((units, r.evaluations as f64, model, r.iterations, r.coarse_evaluations));
        if units == 30 {
            big = t;
            m30 = r.iterations;
        }
    }
    // least-squares fit of evaluations = a * model through the origin
    let a = points.iter().map(|p| p.1 * p.2).sum::<f64>() / points.iter().map(|p| p.2 * p.2).sum::<f64>();
    let ratios: Vec<f64> = points.iter().map(|p| p.1 / (a * p.2)).collect();
    let in_band = ratios.iter().all(|&r| (1.0 / FIT_BAND..=FIT_BAND).contains(&r));
    Line {
        id: 10,
        title: "scale smoke test",
        pass: big < SCALE_TIME_LIMIT && in_band,
        detail: format!(
            "V=30 Q=27 search {:.3} s (limit {} s), m = {m30}; evaluations / fitted m*V^2*Q^2 = {} (band {FIT_BAND}x); runs {}",
            big.as_secs_f64(),
            SCALE_TIME_LIMIT.as_secs(),
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", "),
            points
                .iter()
                .map(|p| format!("V={}: m={} coarse={} evals={}", p.0, p.3, p.4, p.1))
                .collect::<Vec<_>>()
                .join("; ")
        ),
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let set = suite_instances();
    let mut stats = MoveStats::default();
    let mut staircases = Vec::new();
    let lines = vec![
        criterion1(&set),
        criterion2(&set),
        criterion3(),
        criterion4(&set, &mut stats),
        criterion5(&mut stats),
        criterion6(&set, &mut stats, &mut staircases),
        criterion7(&stats),
        criterion8(&stats),
        criterion9(&staircases),
        criterion10(),
    ];
    let mut failed = 0;
    for l in &lines {
        println!(
            "criterion {:>2} {:<32} {}  {}",
            l.id,
            l.title,
            if l.pass { "PASS" } else { "FAIL" },
            l.detail.trim_end()
        );
        failed += usize::from(!l.pass);
    }
    println!("acceptance: {} passed, {} failed", lines.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
