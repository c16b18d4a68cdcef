//! Propositional CNF with an existential prefix.

mod dimacs;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use dimacs::{parse_dimacs, write_dimacs, write_dimacs_with_comments};

pub type VarId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: literal {lit} out of range 1..={num_vars}")]
    LiteralOutOfRange { line: usize, lit: i64, num_vars: u32 },
    #[error("line {line}: duplicate existential prefix line")]
    DuplicatePrefix { line: usize },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("variable {var} out of range 1..={num_vars}")]
    VarOutOfRange { var: VarId, num_vars: u32 },
    #[error("bound variable {var} collides with a variable of the other formula")]
    Collision { var: VarId },
    #[error("formula is not {0}")]
    Class(&'static str),
}

/// A literal over variable ids starting at 1, stored as a signed DIMACS integer.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn pos(v: VarId) -> Lit {
        assert!(v > 0);
        Lit(v as i32)
    }

    pub fn neg(v: VarId) -> Lit {
        assert!(v > 0);
        Lit(-(v as i32))
    }

    pub fn new(v: VarId, positive: bool) -> Lit {
        if positive {
            Lit::pos(v)
        } else {
            Lit::neg(v)
        }
    }

    pub fn from_dimacs(x: i32) -> Lit {
        assert!(x != 0);
        Lit(x)
    }

    pub fn dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> VarId {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn negated(self) -> Lit {
        Lit(-self.0)
    }

    /// Truth value under `assign`, where `assign[v - 1]` is the value of `v`.
    pub fn eval(self, assign: &[bool]) -> bool {
        assign[self.var() as usize - 1] == self.is_positive()
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Clause = Vec<Lit>;

/// Syntactic class flags, all relative to the free/bound split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassFlags {
    /// Every free variable occurs only negatively.
    pub cnf_neg: bool,
    /// Every free variable occurs only positively.
    pub cnf_pos: bool,
    /// Every clause has at most one negative literal.
    pub dual_horn: bool,
    /// Largest clause length.
    pub width: usize,
}

impl ClassFlags {
    pub fn is_kcnf(&self, k: usize) -> bool {
        self.width <= k
    }
}

impl fmt::Display for ClassFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = vec![format!("{}CNF", self.width.max(1))];
        if self.cnf_pos {
            names.push("CNF+".into());
        }
        if self.cnf_neg {
            names.push("CNF-".into());
        }
        if self.dual_horn {
            names.push("DualHorn".into());
        }
        f.write_str(&names.join(","))
    }
}

/// A CNF whose variables are `1..=num_vars`; the `bound` ones are
/// existentially quantified and the rest are free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QbFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    bound: BTreeSet<VarId>,
}

impl QbFormula {
    pub fn new(
        num_vars: u32,
        clauses: Vec<Clause>,
        bound: impl IntoIterator<Item = VarId>,
    ) -> Result<Self, CnfError> {
        let bound: BTreeSet<VarId> = bound.into_iter().collect();
        for &var in &bound {
            if var == 0 || var > num_vars {
                return Err(CnfError::VarOutOfRange { var, num_vars });
            }
        }
        for l in clauses.iter().flatten() {
            if l.var() > num_vars {
                return Err(CnfError::VarOutOfRange {
                    var: l.var(),
                    num_vars,
                });
            }
        }
        Ok(QbFormula {
            num_vars,
            clauses,
            bound,
        })
    }

    pub fn quantifier_free(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        Self::new(num_vars, clauses, [])
    }

    /// Convenience constructor from DIMACS integers; panics on out-of-range input.
    pub fn from_ints(num_vars: u32, clauses: &[&[i32]], bound: &[VarId]) -> Self {
        let cls = clauses
            .iter()
            .map(|c| c.iter().map(|&x| Lit::from_dimacs(x)).collect())
            .collect();
        Self::new(num_vars, cls, bound.iter().copied()).expect("valid formula")
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn bound(&self) -> &BTreeSet<VarId> {
        &self.bound
    }

    pub fn is_bound(&self, v: VarId) -> bool {
        self.bound.contains(&v)
    }

    pub fn free_vars(&self) -> Vec<VarId> {
        (1..=self.num_vars).filter(|v| !self.bound.contains(v)).collect()
    }

    pub fn bound_vars(&self) -> Vec<VarId> {
        self.bound.iter().copied().collect()
    }

    pub fn push_clause(&mut self, clause: Clause) -> Result<(), CnfError> {
        if let Some(l) = clause.iter().find(|l| l.var() > self.num_vars) {
            return Err(CnfError::VarOutOfRange {
                var: l.var(),
                num_vars: self.num_vars,
            });
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Adds fresh variables `num_vars+1..=num_vars+count`, returning the first.
    pub fn add_vars(&mut self, count: u32, bound: bool) -> VarId {
        let first = self.num_vars + 1;
        self.num_vars += count;
        if bound {
            self.bound.extend(first..=self.num_vars);
        }
        first
    }

    pub fn classify(&self) -> ClassFlags {
        classify(self)
    }

    pub fn satisfied_by(&self, assign: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.eval(assign)))
    }

    /// Applies `map` to every variable id; ids missing from the map are kept.
    pub fn renumber(&self, num_vars: u32, map: &BTreeMap<VarId, VarId>) -> Result<Self, CnfError> {
        let m = |v: VarId| *map.get(&v).unwrap_or(&v);
        let clauses = self
            .clauses
            .iter()
            .map(|c| c.iter().map(|l| Lit::new(m(l.var()), l.is_positive())).collect())
            .collect();
        Self::new(num_vars, clauses, self.bound.iter().map(|&v| m(v)))
    }
}

pub fn classify(f: &QbFormula) -> ClassFlags {
    let mut flags = ClassFlags {
        cnf_neg: true,
        cnf_pos: true,
        dual_horn: true,
        width: 0,
    };
    for c in &f.clauses {
        flags.width = flags.width.max(c.len());
        if c.iter().filter(|l| !l.is_positive()).count() > 1 {
            flags.dual_horn = false;
        }
        for l in c.iter().filter(|l| !f.is_bound(l.var())) {
            if l.is_positive() {
                flags.cnf_neg = false;
            } else {
                flags.cnf_pos = false;
            }
        }
    }
    flags
}

/// Conjunction of two prefix formulas over a shared free-variable id space.
///
/// A bound variable of one side collides when its id is declared (free or
/// bound) by the other side. With `rename`, colliding bound variables get
/// fresh ids above both universes; without it a collision is an error.
pub fn prenex_conjoin(a: &QbFormula, b: &QbFormula, rename: bool) -> Result<QbFormula, CnfError> {
    let mut next = a.num_vars.max(b.num_vars);
    let mut ma = BTreeMap::new();
    let mut mb = BTreeMap::new();
    // An id bound on both sides keeps its binding in `a`.
    let clashes = a
        .bound
        .iter()
        .filter(|&&v| v <= b.num_vars && !b.is_bound(v))
        .map(|&v| (v, true))
        .chain(b.bound.iter().filter(|&&v| v <= a.num_vars).map(|&v| (v, false)));
    for (v, in_a) in clashes {
        if !rename {
            return Err(CnfError::Collision { var: v });
        }
        next += 1;
        if in_a { &mut ma } else { &mut mb }.insert(v, next);
    }
    let ra = a.renumber(next, &ma)?;
    let rb = b.renumber(next, &mb)?;
    let mut clauses = ra.clauses;
    clauses.extend(rb.clauses);
    QbFormula::new(next, clauses, ra.bound.into_iter().chain(rb.bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_projected(f: &QbFormula) -> usize {
        let n = f.num_vars() as usize;
        let mut seen = BTreeSet::new();
        for mask in 0u32..(1 << n) {
            let assign: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            if f.satisfied_by(&assign) {
                let free: Vec<bool> = f.free_vars().iter().map(|&v| assign[v as usize - 1]).collect();
                seen.insert(free);
            }
        }
        seen.len()
    }

    #[test]
    fn mixed_polarity_is_neither() {
        let f = QbFormula::from_ints(2, &[&[-1, 2]], &[]);
        let c = f.classify();
        assert!(c.is_kcnf(2) && c.dual_horn && !c.cnf_neg && !c.cnf_pos);
    }

    #[test]
    fn two_negative_literals_break_dual_horn() {
        let f = QbFormula::from_ints(3, &[&[-1, -2, 3]], &[]);
        assert!(!f.classify().dual_horn);
    }

    #[test]
    fn free_variable_negative_only() {
        let f = QbFormula::from_ints(2, &[&[-1, 2]], &[2]);
        let c = f.classify();
        assert!(c.cnf_neg && c.dual_horn && c.is_kcnf(2) && !c.cnf_pos);
    }

    #[test]
    fn conjoin_without_collision() {
        let a = QbFormula::from_ints(2, &[&[-1, -2]], &[]);
        let b = QbFormula::from_ints(3, &[&[-1, 3]], &[3]);
        let c = prenex_conjoin(&a, &b, false).unwrap();
        assert_eq!(c, QbFormula::from_ints(3, &[&[-1, -2], &[-1, 3]], &[3]));
        assert!(c.classify().cnf_neg);
    }

    #[test]
    fn conjoin_renames_shared_bound_variable() {
        let a = QbFormula::from_ints(2, &[&[-1, 2]], &[2]);
        let b = QbFormula::from_ints(2, &[&[-1, -2], &[1, 2]], &[2]);
        assert!(matches!(
            prenex_conjoin(&a, &b, false),
            Err(CnfError::Collision { var: 2 })
        ));
        let c = prenex_conjoin(&a, &b, true).unwrap();
        assert_eq!(c.free_vars(), vec![1]);
        assert_eq!(c.bound_vars(), vec![2, 3]);
        // x=1 has a witness in a and in b separately.
        assert_eq!(brute_projected(&c), 2);
    }

    #[test]
    fn constructor_checks_ranges() {
        assert!(QbFormula::new(2, vec![vec![Lit::pos(3)]], []).is_err());
        assert!(QbFormula::new(2, vec![], [3]).is_err());
        assert!(QbFormula::new(2, vec![], [0]).is_err());
    }
}
