//! `rdalloc`: generate instances, run the solvers, emit staircases and run
//! the cross-check suite.
//!
//! Exit codes: 0 success, 1 I/O error or failed verification, 2 usage or
//! bad argument, 3 unreadable or invalid instance, 4 infeasible budget,
//! 5 enumeration too large, 6 iteration limit, 7 internal inconsistency.
//! Errors are written to stderr as one JSON object.

mod report;
mod suite;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use rdalloc::oracle::{brute_force_capped, lagrangian_brute_capped, DEFAULT_ENUM_CAP};
use rdalloc::{
    extract_extreme_solutions, gen_knapsack_instance, gen_synthetic, gen_uniform, lagrangian_cost,
    search_optimal_multiplier, solve_constrained, solve_lagrangian, sweep, write_staircase_csv, Error,
    InstanceFile, KnapsackSpec, Profile, RdInstance, Scalar, SearchConfig, SweepConfig, TableLayout,
};
use serde_json::json;

use report::{instance_digest, RunReport};

#[derive(Parser)]
#[command(name = "rdalloc", version, about = "Rate allocation for dependently coded unit sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance file.
    Gen(GenArgs),
    /// Solve an instance and print a JSON report.
    Solve(SolveArgs),
    /// Emit the rate-vs-multiplier staircase as CSV.
    Sweep(SweepArgs),
    /// Run the solver/oracle cross-check suite, or validate instance files.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Knapsack,
    Synthetic,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Records,
    Dense,
}

impl From<LayoutArg> for TableLayout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::Records => TableLayout::Records,
            LayoutArg::Dense => TableLayout::Dense,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    /// Output instance path.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of units (synthetic, uniform).
    #[arg(long, default_value_t = 10)]
    units: usize,
    /// Number of quantizers (synthetic, uniform).
    #[arg(long, default_value_t = 3)]
    quantizers: usize,
    #[arg(long, default_value = "convex")]
    profile: Profile,
    /// Largest rate entry (uniform).
    #[arg(long, default_value_t = 10)]
    max_rate: u64,
    /// Largest distortion entry (uniform).
    #[arg(long, default_value_t = 20)]
    max_dist: u64,
    /// Knapsack spec JSON: `{"items": [{"weight": .., "profit": ..}], "capacity": ..}`.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Random knapsack item count when no spec is given.
    #[arg(long, default_value_t = 8)]
    items: usize,
    #[arg(long, value_enum, default_value = "records")]
    layout: LayoutArg,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Method {
    Constrained,
    Lagrangian,
    Search,
    Brute,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "search")]
    method: Method,
    /// Rate budget (constrained, search, brute).
    #[arg(long)]
    budget: Option<f64>,
    /// Multiplier (lagrangian, brute without budget).
    #[arg(long)]
    lambda: Option<f64>,
    /// Rate grid step of the constrained solver.
    #[arg(long, default_value_t = 1.0)]
    quantum: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_init: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Skip the bisection phase and march from the initial multiplier.
    #[arg(long)]
    no_coarse: bool,
    /// Check every incremental table update against a full solve.
    #[arg(long)]
    verify_updates: bool,
    /// Use exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    lambda_min: f64,
    #[arg(long)]
    lambda_max: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: usize,
    #[arg(long)]
    exact: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random instances per check.
    #[arg(long, default_value_t = 60)]
    cases: usize,
    /// Validate these instance files instead of running the suite.
    #[arg(long = "instance")]
    instances: Vec<PathBuf>,
}

struct Failure {
    code: u8,
    body: serde_json::Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (code, kind, extra) = match &e {
            Error::Io(_) => (1, "io", json!(null)),
            Error::InvalidArgument(_) => (2, "invalid_argument", json!(null)),
            Error::Json(_) | Error::Format(_) | Error::Csv(_) => (3, "parse", json!(null)),
            Error::InvalidInstance(v) => (3, "invalid_instance", json!({ "violations": v })),
            Error::Index(_) | Error::InvalidSolution(_) => (3, "invalid_instance", json!(null)),
            Error::Infeasible { budget, min_rate } => {
                (4, "infeasible", json!({ "budget": budget, "min_rate": min_rate }))
            }
            Error::TooLarge { count, cap } => (
                5,
                "too_large",
                json!({ "count": count.to_string(), "cap": cap.to_string() }),
            ),
            Error::IterationLimit { limit, trace } => {
                (6, "iteration_limit", json!({ "limit": limit, "trace": trace }))
            }
            Error::Consistency(_) => (7, "consistency", json!(null)),
        };
        let mut body = json!({ "error": kind, "message": message });
        if !extra.is_null() {
            body["details"] = extra;
        }
        Failure { code, body }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CmdResult = Result<u8, Failure>;

fn enum_cap() -> Result<u128, Failure> {
    match std::env::var("RDALLOC_ENUM_CAP") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("RDALLOC_ENUM_CAP is not an integer: {s:?}")).into()),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_gen(a: &GenArgs) -> CmdResult {
    let layout = a.layout.into();
    let (file, budget) = match a.kind {
        GenKind::Knapsack => {
            let spec = match &a.spec {
                Some(p) => serde_json::from_str::<KnapsackSpec>(&std::fs::read_to_string(p)?).map_err(Error::from)?,
                None => KnapsackSpec::random(a.items, 10, 20, a.seed),
            };
            let (inst, budget) = gen_knapsack_instance::<f64>(&spec)?;
            (InstanceFile::from_instance(&inst, layout)?, Some(budget))
        }
        GenKind::Synthetic => {
            let inst = gen_synthetic::<f64>(a.units, a.quantizers, a.seed, a.profile)?;
            (InstanceFile::from_instance(&inst, layout)?, None)
        }
        GenKind::Uniform => {
            let inst = gen_uniform::<f64>(a.units, a.quantizers, a.seed, a.max_rate, a.max_dist)?;
            (InstanceFile::from_instance(&inst, layout)?, None)
        }
    };
    file.write(&a.out)?;
    let mut summary = json!({
        "path": a.out.display().to_string(),
        "unit_count": file.unit_count,
        "quantizer_count": file.quantizers.len(),
    });
    if let Some(b) = budget {
        summary["budget"] = json!(b);
    }
    println!("{summary}");
    Ok(0)
}

fn need(v: Option<f64>, flag: &str, method: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required for method {method}")).into())
}

fn solve_with<S: Scalar>(
    a: &SolveArgs,
    inst: &RdInstance<S>,
    conv: impl Fn(f64) -> S,
) -> Result<(serde_json::Value, serde_json::Value, serde_json::Value), Failure> {
    let back = |x: S| x.to_f64_lossy();
    let sol_json = |s: &rdalloc::Solution<S>| serde_json::to_value(s.map(back)).expect("plain data");
    Ok(match a.method {
        Method::Constrained => {
            let budget = need(a.budget, "budget", "constrained")?;
            let s = solve_constrained(inst, conv(budget), conv(a.quantum))?;
            (
                json!({ "budget": budget, "quantum": a.quantum }),
                json!({ "solution": sol_json(&s) }),
                json!({}),
            )
        }
        Method::Lagrangian => {
            let lambda = need(a.lambda, "lambda", "lagrangian")?;
            let l = conv(lambda);
            let (t, s) = solve_lagrangian(inst, l)?;
            let (_, hi) = extract_extreme_solutions(&t, inst)?;
            let result = json!({
                "solution": sol_json(&s),
                "upper": sol_json(&hi),
                "cost": {
                    "distortion": back(s.distortion),
                    "rate": back(s.rate),
                    "lambda": back(l),
                    "total": back(lagrangian_cost(&s, l)),
                },
            });
            (
                json!({ "lambda": lambda }),
                result,
                json!({ "evaluations": t.evaluations() }),
            )
        }
        Method::Search => {
            let budget = need(a.budget, "budget", "search")?;
            let cfg = SearchConfig {
                lambda_init: conv(a.lambda_init),
                max_iters: a.max_iters,
                coarse: !a.no_coarse,
                verify_updates: a.verify_updates,
                check_lemma1: true,
                ..SearchConfig::default()
            };
            let r = search_optimal_multiplier(inst, conv(budget), &cfg)?;
            let counters = json!({
                "iterations": r.iterations,
                "idle_moves": r.idle_moves,
                "coarse_evaluations": r.coarse_evaluations,
                "evaluations": r.evaluations,
            });
            (
                json!({
                    "budget": budget,
                    "lambda_init": a.lambda_init,
                    "max_iters": a.max_iters,
                    "coarse": !a.no_coarse,
                }),
                serde_json::to_value(r.map(back)).expect("plain data"),
                counters,
            )
        }
        Method::Brute => {
            let cap = enum_cap()?;
            match (a.budget, a.lambda) {
                (Some(budget), _) => {
                    let s = brute_force_capped(inst, conv(budget), cap)?;
                    (json!({ "budget": budget }), json!({ "solution": sol_json(&s) }), json!({}))
                }
                (None, Some(lambda)) => {
                    let s = lagrangian_brute_capped(inst, conv(lambda), cap)?;
                    (json!({ "lambda": lambda }), json!({ "solution": sol_json(&s) }), json!({}))
                }
                _ => return Err(Error::InvalidArgument("--budget or --lambda is required for method brute".into()).into()),
            }
        }
    })
}

fn cmd_solve(a: &SolveArgs) -> CmdResult {
    let file = InstanceFile::read(&a.instance)?;
    let digest = instance_digest(&file)?;
    let start = Instant::now();
    let (mut parameters, result, counters) = if a.exact {
        let inst: RdInstance<Rational64> = file.to_instance()?;
        solve_with(a, &inst, Rational64::from_f64_lossy)?
    } else {
        let inst: RdInstance<f64> = file.to_instance()?;
        solve_with(a, &inst, |x| x)?
    };
    parameters["exact"] = json!(a.exact);
    let report = RunReport {
        instance_digest: digest,
        method: match a.method {
            Method::Constrained => "constrained",
            Method::Lagrangian => "lagrangian",
            Method::Search => "search",
            Method::Brute => "brute",
        },
        parameters,
        result,
        counters,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let mut out = output(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(0)
}

fn sweep_with<S: Scalar>(a: &SweepArgs, inst: &RdInstance<S>, conv: impl Fn(f64) -> S) -> CmdResult {
    let cfg = SweepConfig {
        max_iters: a.max_iters,
        ..SweepConfig::default()
    };
    let st = sweep(inst, conv(a.lambda_min), conv(a.lambda_max), &cfg)?;
    let rows: Vec<_> = st
        .rows
        .iter()
        .map(|r| rdalloc::StaircaseRow {
            lambda: r.lambda.to_f64_lossy(),
            rate_lower: r.rate_lower.to_f64_lossy(),
            rate_upper: r.rate_upper.to_f64_lossy(),
            distortion_lower: r.distortion_lower.to_f64_lossy(),
            distortion_upper: r.distortion_upper.to_f64_lossy(),
        })
        .collect();
    let mut out = output(a.out.as_deref())?;
    write_staircase_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    let file = InstanceFile::read(&a.instance)?;
    if a.exact {
        sweep_with(a, &file.to_instance::<Rational64>()?, Rational64::from_f64_lossy)
    } else {
        sweep_with(a, &file.to_instance::<f64>()?, |x| x)
    }
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    if !a.instances.is_empty() {
        return Ok(suite::validate_files(&a.instances));
    }
    let cap = enum_cap()?;
    let rows = suite::run(a.seed, a.cases, cap);
    Ok(suite::print_matrix(&rows))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.body);
            ExitCode::from(f.code)
        }
    }
}
