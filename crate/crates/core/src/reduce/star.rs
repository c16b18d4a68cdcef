use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::ReduceError;
use crate::cnf::{Lit, QbFormula, VarId};
use crate::count::{count_assignments, CountError, CountMode, CountResult, CountStats};
use crate::Count;

/// Anything that counts the non-zero free assignments of a prefix CNF with
/// a satisfying extension.
pub trait StarOracle {
    fn star_count(&mut self, f: &QbFormula) -> Result<Count, CountError>;
}

impl<F: FnMut(&QbFormula) -> Result<Count, CountError>> StarOracle for F {
    fn star_count(&mut self, f: &QbFormula) -> Result<Count, CountError> {
        self(f)
    }
}

/// Star counting by exhaustive search.
#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOracle;

impl StarOracle for SearchOracle {
    fn star_count(&mut self, f: &QbFormula) -> Result<Count, CountError> {
        Ok(count_assignments(f, CountMode::Star).count)
    }
}

/// The probe formula: clauses without free variables, over the bound
/// variables renumbered from 1, conjoined with `¬a ∨ ¬b` on two fresh free
/// variables `a, b`. Its star count is 2 when the all-zero free assignment
/// of `f` extends to a model and 0 otherwise.
pub fn star_probe(f: &QbFormula) -> Result<QbFormula, ReduceError> {
    let bound = f.bound_vars();
    let map: BTreeMap<VarId, VarId> = bound.iter().zip(1..).map(|(&v, i)| (v, i)).collect();
    let b = bound.len() as VarId;
    let mut clauses: Vec<Vec<Lit>> = f
        .clauses()
        .iter()
        .filter(|c| c.iter().all(|l| f.is_bound(l.var())))
        .map(|c| c.iter().map(|l| Lit::new(map[&l.var()], l.is_positive())).collect())
        .collect();
    clauses.push(vec![Lit::neg(b + 1), Lit::neg(b + 2)]);
    Ok(QbFormula::new(b + 2, clauses, 1..=b)?)
}

/// Projected count of a prefix CNF with negative free variables, from two
/// star-count queries: the probe decides whether the all-zero free
/// assignment counts, and `oracle(f)` counts the rest.
pub fn star_turing_reduction(f: &QbFormula, oracle: &mut dyn StarOracle) -> Result<CountResult, ReduceError> {
    if !f.classify().cnf_neg {
        return Err(ReduceError::Class("Σ1CNF-"));
    }
    let probe = oracle.star_count(&star_probe(f)?)?;
    let mut stats = CountStats {
        nodes: 0,
        oracle_calls: 1,
    };
    if probe.is_zero() {
        return Ok(CountResult::new(Count::zero(), stats));
    }
    if probe != Count::from(2u32) {
        return Err(ReduceError::OracleFault(format!("probe answered {probe}, expected 0 or 2")));
    }
    let k = oracle.star_count(f)?;
    stats.oracle_calls += 1;
    Ok(CountResult::new(k + Count::one(), stats))
}
