use thiserror::Error;

use crate::model::Violation;
use crate::search::TraceEntry;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("invalid instance ({} violation(s)): {}", .0.len(), first_violation(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("infeasible: budget {budget} is below the minimum achievable rate {min_rate}")]
    Infeasible { budget: f64, min_rate: f64 },

    #[error("enumeration too large: {count} assignments exceed the cap of {cap}")]
    TooLarge { count: u128, cap: u128 },

    #[error("iteration limit of {limit} reached before the budget was bracketed")]
    IterationLimit {
        limit: usize,
        trace: Vec<TraceEntry<f64>>,
    },

    #[error("incremental table update diverged from full recompute: {0}")]
    Consistency(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn first_violation(v: &[Violation]) -> String {
    v.first().map(|x| x.to_string()).unwrap_or_default()
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
