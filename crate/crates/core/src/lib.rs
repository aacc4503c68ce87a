//! Optimal rate allocation over a sequence of dependently coded units.
//!
//! Each unit of a sequence is either coded at one of a set of quantizers or
//! skipped and interpolated from its coded neighbours. Coding costs depend
//! on the previous coded unit and its quantizer. The crate minimizes total
//! distortion under a rate budget, either exactly ([`solve_constrained`],
//! pseudo-polynomial in the budget) or through the Lagrangian relaxation
//! ([`solve_lagrangian`], [`search_optimal_multiplier`]) which runs in
//! polynomial time and reports a bound on its distance from the optimum.
//!
//! All solvers are generic over [`Scalar`]; `f64`, `f32` and
//! [`Rational64`](num_rational::Rational64) are supported.
//!
//! ```
//! use rdalloc::{gen_synthetic, search_optimal_multiplier, Profile, SearchConfig};
//!
//! let inst = gen_synthetic::<f64>(8, 3, 7, Profile::Convex).unwrap();
//! let budget = inst.min_rate() * 1.5;
//! let res = search_optimal_multiplier(&inst, budget, &SearchConfig::default()).unwrap();
//! assert!(res.lower.rate <= budget && budget <= res.upper.rate);
//! ```

// `!(x > 0)` is meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constrained;
pub mod error;
pub mod format;
pub mod generate;
pub mod lagrangian;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod search;

pub use constrained::{solve_constrained, ConstrainedState};
pub use error::{Error, Result};
pub use format::{load_instance, save_instance, InstanceFile, TableLayout};
pub use generate::{gen_knapsack_instance, gen_synthetic, gen_uniform, KnapsackItem, KnapsackSpec, Profile};
pub use lagrangian::{
    extract_extreme_solutions, lagrangian_cost, solve_lagrangian, solve_tables, LagrangeTables, Side,
};
pub use model::{evaluate_solution, validate_instance, RdInstance, RdTables, Solution, Violation};
pub use scalar::Scalar;
pub use search::{
    apply_singular_move, candidate_minus, candidate_plus, duality_gap_bound, next_singular_minus,
    next_singular_plus, search_optimal_multiplier, sweep, verify_lemma1, write_staircase_csv, Direction,
    Owner, Phase, SearchConfig, SearchResult, SingularCandidate, SingularStep, Staircase, StaircaseRow,
    SweepConfig, TraceEntry,
};

pub type Instance = RdInstance<f64>;
pub type Instance32 = RdInstance<f32>;
pub type ExactInstance = RdInstance<num_rational::Rational64>;
pub type Tables = RdTables<f64>;
pub type ExactTables = RdTables<num_rational::Rational64>;
pub type Allocation = Solution<f64>;
pub type ExactAllocation = Solution<num_rational::Rational64>;
