//! Cross-check suite behind `rdalloc verify`.

use std::path::PathBuf;

use rdalloc::oracle::{brute_force_capped, convex_hull_sweep, knapsack_solve, lagrangian_brute_capped};
use rdalloc::{
    gen_knapsack_instance, gen_uniform, lagrangian_cost, search_optimal_multiplier, solve_constrained,
    solve_lagrangian, sweep, validate_instance, Instance, InstanceFile, KnapsackSpec, Result, SearchConfig,
    SweepConfig,
};

pub struct Row {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    pub first_failure: Option<String>,
}

struct Check {
    row: Row,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self {
            row: Row {
                name,
                passed: 0,
                total: 0,
                first_failure: None,
            },
        }
    }

    fn record(&mut self, case: &str, outcome: Result<std::result::Result<(), String>>) {
        self.row.total += 1;
        let failure = match outcome {
            Ok(Ok(())) => {
                self.row.passed += 1;
                return;
            }
            Ok(Err(msg)) => msg,
            Err(e) => format!("error: {e}"),
        };
        self.row.first_failure.get_or_insert_with(|| format!("{case}: {failure}"));
    }
}

fn expect(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn instance(seed: u64, i: usize) -> Result<(String, Instance)> {
    let units = 3 + i % 4;
    let qn = 2 + i % 2;
    let s = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
    Ok((format!("uniform V={units} Q={qn} seed={s}"), gen_uniform(units, qn, s, 12, 20)?))
}

fn budget_of(inst: &Instance, i: usize) -> f64 {
    inst.min_rate() + (i * 7 % 25) as f64
}

fn checked() -> SearchConfig<f64> {
    SearchConfig {
        verify_updates: true,
        check_lemma1: true,
        ..SearchConfig::default()
    }
}

pub fn run(seed: u64, cases: usize, cap: u128) -> Vec<Row> {
    let mut constrained = Check::new("constrained == brute force");
    let mut lagrangian = Check::new("lagrangian == brute force");
    let mut knapsack = Check::new("knapsack reduction");
    let mut bracket = Check::new("search bracket and bound");
    let mut exact_hit = Check::new("exact-budget optimality");
    let mut hull = Check::new("staircase == hull plateaus");
    let mut updates = Check::new("incremental updates");
    let mut lemma = Check::new("ties at every move");
    let mut monotone = Check::new("staircase monotone");

    for i in 0..cases {
        let (name, inst) = match instance(seed, i) {
            Ok(x) => x,
            Err(e) => {
                constrained.record(&format!("case {i}"), Err(e));
                continue;
            }
        };
        let budget = budget_of(&inst, i);

        constrained.record(&name, (|| {
            let dp = solve_constrained(&inst, budget, 1.0)?;
            let bf = brute_force_capped(&inst, budget, cap)?;
            Ok(expect(dp.distortion == bf.distortion, || {
                format!("budget {budget}: dp {} vs brute force {}", dp.distortion, bf.distortion)
            }))
        })());

        lagrangian.record(&name, (|| {
            for lambda in [0.0, 0.5, 1.0, 2.0, 10.0] {
                let (_, s) = solve_lagrangian(&inst, lambda)?;
                let bf = lagrangian_brute_capped(&inst, lambda, cap)?;
                let (a, b) = (lagrangian_cost(&s, lambda), lagrangian_cost(&bf, lambda));
                if a != b {
                    return Ok(Err(format!("lambda {lambda}: {a} vs {b}")));
                }
            }
            Ok(Ok(()))
        })());

        let search = search_optimal_multiplier(&inst, budget, &checked());
        updates.record(&name, search.as_ref().map(|_| Ok(())).map_err(clone_err));
        if let Ok(r) = &search {
            bracket.record(&name, (|| {
                let bf = brute_force_capped(&inst, budget, cap)?;
                let ok = r.lower.rate <= budget
                    && (budget <= r.upper.rate || r.lower == r.upper)
                    && r.upper.distortion <= bf.distortion
                    && bf.distortion <= r.lower.distortion
                    && r.lower.distortion - bf.distortion <= r.bound;
                Ok(expect(ok, || {
                    format!(
                        "budget {budget}: lower ({}, {}), upper ({}, {}), optimum {}",
                        r.lower.rate, r.lower.distortion, r.upper.rate, r.upper.distortion, bf.distortion
                    )
                }))
            })());
            lemma.record(&name, Ok(expect(r.trace.iter().all(|e| e.lemma1 != Some(false)), || {
                "a move without a tie".into()
            })));
        }

        exact_hit.record(&name, (|| {
            let lambda = [0.5, 1.0, 2.0][i % 3];
            let target = solve_lagrangian(&inst, lambda)?.1.rate;
            let r = search_optimal_multiplier(&inst, target, &checked())?;
            let bf = brute_force_capped(&inst, target, cap)?;
            Ok(expect(r.lower.distortion == bf.distortion, || {
                format!("budget {target}: search {} vs optimum {}", r.lower.distortion, bf.distortion)
            }))
        })());

        let cfg = SweepConfig {
            verify_updates: true,
            check_lemma1: true,
            ..SweepConfig::default()
        };
        match sweep(&inst, 0.0, 1e6, &cfg) {
            Ok(st) => {
                updates.record(&name, Ok(Ok(())));
                lemma.record(&name, Ok(expect(st.lemma1.iter().all(|&x| x), || "a move without a tie".into())));
                monotone.record(&name, Ok(expect(
                    st.rows.windows(2).all(|w| w[0].rate_lower >= w[1].rate_upper && w[0].rate_upper >= w[0].rate_lower),
                    || "rate increases with the multiplier".into(),
                )));
                hull.record(&name, (|| {
                    let mut ours: Vec<(f64, f64)> = st
                        .rows
                        .iter()
                        .flat_map(|r| [(r.rate_lower, r.distortion_lower), (r.rate_upper, r.distortion_upper)])
                        .collect();
                    sort_pairs(&mut ours);
                    let mut reference: Vec<(f64, f64)> = convex_hull_sweep(&inst, 0.0, 1e6, 1.0, cap)?
                        .iter()
                        .map(|p| (p.rate, p.distortion))
                        .collect();
                    sort_pairs(&mut reference);
                    Ok(expect(ours == reference, || format!("{ours:?} vs {reference:?}")))
                })());
            }
            Err(e) => updates.record(&name, Err(e)),
        }
    }

    for i in 0..cases {
        let s = seed.wrapping_mul(7_919).wrapping_add(i as u64);
        let spec = KnapsackSpec::random(1 + i % 12, 10, 20, s);
        knapsack.record(&format!("knapsack seed={s}"), (|| {
            let (inst, budget) = gen_knapsack_instance::<f64>(&spec)?;
            let target = spec.distortion_for(knapsack_solve(&spec)) as f64;
            let dp = solve_constrained(&inst, budget, 1.0)?;
            let r = search_optimal_multiplier(&inst, budget, &SearchConfig::default())?;
            let ok = dp.distortion == target
                && r.lower.distortion - target <= r.bound
                && (r.lower.rate != budget || r.lower.distortion == target);
            Ok(expect(ok, || {
                format!("optimum {target}, dp {}, search {} (bound {})", dp.distortion, r.lower.distortion, r.bound)
            }))
        })());
    }

    [constrained, lagrangian, knapsack, bracket, exact_hit, hull, updates, lemma, monotone]
        .into_iter()
        .map(|c| c.row)
        .collect()
}

fn clone_err(e: &rdalloc::Error) -> rdalloc::Error {
    rdalloc::Error::Consistency(e.to_string())
}

fn sort_pairs(v: &mut Vec<(f64, f64)>) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite totals"));
    v.dedup();
}

/// Prints one line per check; returns the exit code.
pub fn print_matrix(rows: &[Row]) -> u8 {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failed = false;
    for r in rows {
        let ok = r.passed == r.total;
        failed |= !ok;
        println!(
            "{:<width$}  {:>4}/{:<4}  {}",
            r.name,
            r.passed,
            r.total,
            if ok { "PASS" } else { "FAIL" }
        );
        if let Some(f) = &r.first_failure {
            println!("{:<width$}  first failure: {f}", "");
        }
    }
    u8::from(failed)
}

/// Validates instance files; prints each file's violations and returns the
/// exit code.
pub fn validate_files(paths: &[PathBuf]) -> u8 {
    let mut failed = false;
    for p in paths {
        let outcome = InstanceFile::read(p).and_then(|f| f.to_tables::<f64>());
        match outcome {
            Err(e) => {
                failed = true;
                println!("{}: FAIL ({e})", p.display());
            }
            Ok(t) => match validate_instance(&t) {
                Ok(()) => println!("{}: ok", p.display()),
                Err(vs) => {
                    failed = true;
                    println!("{}: FAIL ({} violation(s))", p.display(), vs.len());
                    for v in vs {
                        println!("  {v}");
                    }
                }
            },
        }
    }
    u8::from(failed)
}
