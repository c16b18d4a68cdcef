//! Counting teams, relations and Boolean assignments.

mod relations;
mod sat;
mod teams;

use std::fmt;

use thiserror::Error;

use crate::cnf::CnfError;
use crate::eval::EvalError;
use crate::formula::FormulaError;
use crate::structure::StructureError;
use crate::Count;

pub use relations::{count_relations, count_relations_with, RelationalQuery};
pub use sat::{
    count_assignments, count_sigma1_dualhorn, dualhorn_sat, is_satisfiable, CountMode,
};
pub use teams::{count_inclusion_teams, count_inclusion_teams_with, count_teams, count_teams_with};

/// Default limit on enumeration steps.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("candidate space of {needed} exceeds the budget of {budget} steps")]
    Budget { needed: String, budget: u64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("free variable `{0}` is not in the counted tuple")]
    FreeVariable(String),
    #[error("formula is not {0}")]
    Class(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountStats {
    /// Candidates or search nodes visited.
    pub nodes: u64,
    /// Satisfiability checks or oracle queries issued.
    pub oracle_calls: u64,
}

impl std::ops::AddAssign for CountStats {
    fn add_assign(&mut self, o: CountStats) {
        self.nodes += o.nodes;
        self.oracle_calls += o.oracle_calls;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountResult {
    pub count: Count,
    pub stats: CountStats,
}

impl CountResult {
    pub fn new(count: impl Into<Count>, stats: CountStats) -> Self {
        CountResult {
            count: count.into(),
            stats,
        }
    }
}

impl fmt::Display for CountResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountOptions {
    /// Limit on enumeration steps.
    pub budget: u64,
    /// Splits enumerations across the current rayon pool.
    pub parallel: bool,
    /// Skips supersets of failing teams for downward-closed formulas.
    pub prune: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            budget: DEFAULT_BUDGET,
            parallel: true,
            prune: true,
        }
    }
}

impl CountOptions {
    pub fn brute_force() -> Self {
        CountOptions {
            prune: false,
            ..Self::default()
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

/// `2^bits`, or an error when it exceeds `budget`.
pub(crate) fn checked_space(bits: u64, budget: u64) -> Result<u64, CountError> {
    if bits >= 63 || (1u64 << bits) > budget.saturating_add(1) {
        return Err(CountError::Budget {
            needed: format!("2^{bits}"),
            budget,
        });
    }
    Ok(1u64 << bits)
}
