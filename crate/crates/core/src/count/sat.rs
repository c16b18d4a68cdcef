use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{CountError, CountResult, CountStats};
use crate::cnf::{Clause, Lit, QbFormula, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountMode {
    /// Total assignments to all variables satisfying the matrix.
    All,
    /// Free-variable assignments with a satisfying extension to the bound ones.
    Projected,
    /// `Projected` without the all-zero free assignment.
    Star,
}

impl std::str::FromStr for CountMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(CountMode::All),
            "projected" => Ok(CountMode::Projected),
            "star" => Ok(CountMode::Star),
            _ => Err(format!("unknown mode `{s}` (all, projected, star)")),
        }
    }
}

// Partial assignment: 0 unassigned, 1 true, -1 false, indexed by variable id.
type Partial = Vec<i8>;

fn value(l: Lit, a: &Partial) -> i8 {
    let v = a[l.var() as usize];
    if l.is_positive() {
        v
    } else {
        -v
    }
}

fn set(l: Lit, a: &mut Partial) {
    a[l.var() as usize] = if l.is_positive() { 1 } else { -1 };
}

enum Propagation {
    Conflict,
    /// No unsatisfied clause is left.
    Done,
    /// Some unsatisfied clause still has this unassigned variable.
    Open(VarId),
}

fn propagate(clauses: &[Clause], a: &mut Partial, trail: &mut Vec<VarId>) -> Propagation {
    loop {
        let mut changed = false;
        let mut open = None;
        for c in clauses {
            let mut unassigned = None;
            let mut free = 0;
            let mut sat = false;
            for &l in c {
                match value(l, a) {
                    1 => {
                        sat = true;
                        break;
                    }
                    0 => {
                        free += 1;
                        unassigned = Some(l);
                    }
                    _ => {}
                }
            }
            if sat {
                continue;
            }
            match (free, unassigned) {
                (0, _) => return Propagation::Conflict,
                (1, Some(l)) => {
                    set(l, a);
                    trail.push(l.var());
                    changed = true;
                }
                (_, Some(l)) => {
                    open.get_or_insert(l.var());
                }
                _ => unreachable!(),
            }
        }
        if !changed {
            return match open {
                Some(v) => Propagation::Open(v),
                None => Propagation::Done,
            };
        }
    }
}

fn undo(a: &mut Partial, trail: &[VarId]) {
    for &v in trail {
        a[v as usize] = 0;
    }
}

fn dpll(clauses: &[Clause], a: &mut Partial, calls: &mut u64) -> bool {
    *calls += 1;
    let mut trail = Vec::new();
    let v = match propagate(clauses, a, &mut trail) {
        Propagation::Conflict => {
            undo(a, &trail);
            return false;
        }
        Propagation::Done => {
            undo(a, &trail);
            return true;
        }
        Propagation::Open(v) => v,
    };
    for val in [1, -1] {
        a[v as usize] = val;
        let ok = dpll(clauses, a, calls);
        a[v as usize] = 0;
        if ok {
            undo(a, &trail);
            return true;
        }
    }
    undo(a, &trail);
    false
}

/// Whether the matrix of `f` has a satisfying assignment.
pub fn is_satisfiable(f: &QbFormula) -> bool {
    let mut a = vec![0; f.num_vars() as usize + 1];
    dpll(f.clauses(), &mut a, &mut 0)
}

fn pow2(k: usize) -> BigUint {
    BigUint::one() << k
}

fn count_models(clauses: &[Clause], a: &mut Partial, stats: &mut CountStats) -> BigUint {
    stats.nodes += 1;
    let mut trail = Vec::new();
    let result = match propagate(clauses, a, &mut trail) {
        Propagation::Conflict => BigUint::zero(),
        Propagation::Done => pow2(a[1..].iter().filter(|&&x| x == 0).count()),
        Propagation::Open(v) => {
            let mut total = BigUint::zero();
            for val in [1, -1] {
                a[v as usize] = val;
                total += count_models(clauses, a, stats);
                a[v as usize] = 0;
            }
            total
        }
    };
    undo(a, &trail);
    result
}

struct Projector<'f> {
    clauses: &'f [Clause],
    free: Vec<VarId>,
    is_free: Vec<bool>,
    stats: CountStats,
}

impl Projector<'_> {
    fn count(&mut self, i: usize, a: &mut Partial) -> BigUint {
        self.stats.nodes += 1;
        let mut needs_branch = false;
        for c in self.clauses {
            if c.iter().any(|&l| value(l, a) == 1) {
                continue;
            }
            if c.iter().all(|&l| value(l, a) == -1) {
                return BigUint::zero();
            }
            if c.iter().any(|&l| self.is_free[l.var() as usize] && value(l, a) == 0) {
                needs_branch = true;
            }
        }
        if !needs_branch {
            self.stats.oracle_calls += 1;
            let mut calls = 0;
            let sat = dpll(self.clauses, a, &mut calls);
            return if sat {
                pow2(self.free.len() - i)
            } else {
                BigUint::zero()
            };
        }
        let v = self.free[i] as usize;
        let mut total = BigUint::zero();
        for val in [-1, 1] {
            a[v] = val;
            total += self.count(i + 1, a);
        }
        a[v] = 0;
        total
    }
}

/// Exact count of satisfying assignments of `f` in the given mode.
pub fn count_assignments(f: &QbFormula, mode: CountMode) -> CountResult {
    let mut a: Partial = vec![0; f.num_vars() as usize + 1];
    match mode {
        CountMode::All => {
            let mut stats = CountStats::default();
            let count = count_models(f.clauses(), &mut a, &mut stats);
            CountResult { count, stats }
        }
        CountMode::Projected | CountMode::Star => {
            let free = f.free_vars();
            let mut is_free = vec![false; f.num_vars() as usize + 1];
            for &v in &free {
                is_free[v as usize] = true;
            }
            let mut p = Projector {
                clauses: f.clauses(),
                free,
                is_free,
                stats: CountStats::default(),
            };
            let mut count = p.count(0, &mut a);
            if mode == CountMode::Star {
                for &v in &p.free {
                    a[v as usize] = -1;
                }
                p.stats.oracle_calls += 1;
                if dpll(f.clauses(), &mut a, &mut 0) {
                    count -= 1u32;
                }
            }
            CountResult {
                count,
                stats: p.stats,
            }
        }
    }
}

// Least set of variables forced to 0; everything else is set to 1. Fixed
// variables keep their values.
fn dualhorn_propagate(clauses: &[Clause], fixed: &Partial) -> bool {
    let mut zero: Vec<bool> = fixed.iter().map(|&x| x == -1).collect();
    loop {
        let mut changed = false;
        for c in clauses {
            let mut open_neg = None;
            let mut satisfied = false;
            for &l in c {
                let v = l.var() as usize;
                let fv = fixed[v];
                if l.is_positive() {
                    if fv == 1 || (fv == 0 && !zero[v]) {
                        satisfied = true;
                        break;
                    }
                } else if fv == -1 || zero[v] {
                    satisfied = true;
                    break;
                } else if fv == 0 {
                    open_neg = Some(v);
                }
            }
            if satisfied {
                continue;
            }
            match open_neg {
                Some(v) => {
                    zero[v] = true;
                    changed = true;
                }
                None => return false,
            }
        }
        if !changed {
            return true;
        }
    }
}

fn require_dualhorn(f: &QbFormula) -> Result<(), CountError> {
    if f.classify().dual_horn {
        Ok(())
    } else {
        Err(CountError::Class("DualHorn"))
    }
}

/// Satisfiability of a DualHorn matrix by propagating forced zeros.
pub fn dualhorn_sat(f: &QbFormula) -> Result<bool, CountError> {
    require_dualhorn(f)?;
    Ok(dualhorn_propagate(f.clauses(), &vec![0; f.num_vars() as usize + 1]))
}

/// Projected count of a prefix DualHorn formula: each free variable is set
/// to 0 and then 1, and only branches with a satisfiable residual are kept,
/// so every leaf reached is a counted assignment.
pub fn count_sigma1_dualhorn(f: &QbFormula) -> Result<CountResult, CountError> {
    require_dualhorn(f)?;
    let free = f.free_vars();
    let mut fixed: Partial = vec![0; f.num_vars() as usize + 1];
    let mut stats = CountStats {
        nodes: 0,
        oracle_calls: 1,
    };
    if !dualhorn_propagate(f.clauses(), &fixed) {
        return Ok(CountResult::new(0u32, stats));
    }
    fn rec(f: &QbFormula, free: &[VarId], i: usize, fixed: &mut Partial, stats: &mut CountStats) -> BigUint {
        stats.nodes += 1;
        if i == free.len() {
            return BigUint::one();
        }
        let v = free[i] as usize;
        let mut total = BigUint::zero();
        for val in [-1, 1] {
            fixed[v] = val;
            stats.oracle_calls += 1;
            if dualhorn_propagate(f.clauses(), fixed) {
                total += rec(f, free, i + 1, fixed, stats);
            }
        }
        fixed[v] = 0;
        total
    }
    let count = rec(f, &free, 0, &mut fixed, &mut stats);
    Ok(CountResult { count, stats })
}
