//! Lax team semantics.

mod compile;
mod semantics;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::formula::{Formula, Signature, Var};
use crate::structure::{Assignment, Structure, Team};
use compile::{compile, Compiled};
use semantics::{normalize, Row, Run};

/// Default step budget of a single evaluation.
pub const DEFAULT_EVAL_BUDGET: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound by the team or a quantifier")]
    UnboundVariable(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{name}` applied to {found} arguments")]
    Arity { name: String, found: usize },
    #[error("unregistered generalized atom `{0}`")]
    UnknownAtom(String),
    #[error("generalized atom `{name}` has type {expected:?}, used with {found:?}")]
    AtomType {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("generalized atom `{0}` is already registered")]
    DuplicateAtom(String),
    #[error("generalized atom type must be a nonempty list of positive arities")]
    BadAtomType,
    #[error("dependency atom in a first-order position")]
    DependencyAtom,
    #[error("formula is not union closed (only first-order parts and inclusion atoms allowed)")]
    NotUnionClosed,
    #[error("team value {value} outside the domain of size {n}")]
    ValueOutOfRange { value: usize, n: usize },
    #[error("team variables do not match: {0}")]
    TeamMismatch(String),
    #[error("evaluation budget of {budget} steps exceeded")]
    BudgetExceeded { budget: u64 },
}

pub type AtomPredicate = dyn Fn(usize, &[BTreeSet<Vec<usize>>]) -> bool + Send + Sync;

/// A generalized atom of type `(i1, ..., ik)`: a predicate on the domain size
/// and `k` relations of those arities. The predicate must be deterministic
/// and closed under isomorphism; neither is checked.
#[derive(Clone)]
pub struct GeneralizedAtomDef {
    pub name: String,
    pub arities: Vec<usize>,
    predicate: Arc<AtomPredicate>,
}

impl GeneralizedAtomDef {
    pub fn new(
        name: impl Into<String>,
        arities: Vec<usize>,
        predicate: impl Fn(usize, &[BTreeSet<Vec<usize>>]) -> bool + Send + Sync + 'static,
    ) -> Self {
        GeneralizedAtomDef {
            name: name.into(),
            arities,
            predicate: Arc::new(predicate),
        }
    }

    pub fn holds(&self, n: usize, rels: &[BTreeSet<Vec<usize>>]) -> bool {
        (self.predicate)(n, rels)
    }
}

impl fmt::Debug for GeneralizedAtomDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneralizedAtomDef({}{:?})", self.name, self.arities)
    }
}

#[derive(Debug, Clone, Default)]
pub struct AtomRegistry {
    atoms: HashMap<String, Arc<GeneralizedAtomDef>>,
}

impl AtomRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, def: GeneralizedAtomDef) -> Result<(), EvalError> {
        if def.arities.is_empty() || def.arities.contains(&0) {
            return Err(EvalError::BadAtomType);
        }
        if self.atoms.contains_key(&def.name) {
            return Err(EvalError::DuplicateAtom(def.name));
        }
        self.atoms.insert(def.name.clone(), Arc::new(def));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<Arc<GeneralizedAtomDef>> {
        self.atoms.get(name).cloned()
    }

    /// Adds every registered atom type to `sig`.
    pub fn extend_signature(&self, sig: &mut Signature) {
        for (name, def) in &self.atoms {
            sig.add_atom(name.clone(), def.arities.clone());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Uses closure properties to prune the search.
    #[default]
    Optimized,
    /// Follows the semantic clauses literally: all covers for `|`, all
    /// supplementing functions for `E`.
    Definitional,
}

#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    a: &'a Structure,
    registry: Option<&'a AtomRegistry>,
    strategy: Strategy,
    budget: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(a: &'a Structure) -> Self {
        Evaluator {
            a,
            registry: None,
            strategy: Strategy::Optimized,
            budget: DEFAULT_EVAL_BUDGET,
        }
    }

    pub fn with_registry(mut self, registry: &'a AtomRegistry) -> Self {
        self.registry = Some(registry);
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn structure(&self) -> &'a Structure {
        self.a
    }

    /// Resolves `f` once for repeated evaluation on teams over `vars`.
    pub fn prepare(&self, vars: &[Var], f: &Formula) -> Result<Prepared<'a>, EvalError> {
        Ok(Prepared {
            a: self.a,
            compiled: compile(self.a, self.registry, vars, f)?,
            strategy: self.strategy,
            budget: self.budget,
            vars: vars.to_vec(),
        })
    }

    pub fn eval(&self, team: &Team, f: &Formula) -> Result<bool, EvalError> {
        self.prepare(team.vars(), f)?.eval(team)
    }

    pub fn max_subteam(&self, team: &Team, f: &Formula) -> Result<Team, EvalError> {
        self.prepare(team.vars(), f)?.max_subteam(team)
    }
}

/// A formula compiled against a structure and a team variable tuple.
pub struct Prepared<'a> {
    a: &'a Structure,
    compiled: Compiled,
    strategy: Strategy,
    budget: u64,
    vars: Vec<Var>,
}

impl Prepared<'_> {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn is_first_order(&self) -> bool {
        self.root_node().fo
    }

    pub fn is_downward_closed(&self) -> bool {
        self.root_node().downward
    }

    pub fn is_union_closed(&self) -> bool {
        self.root_node().union
    }

    fn root_node(&self) -> &compile::Node {
        &self.compiled.nodes[self.compiled.root]
    }

    fn rows<'r>(&self, rows: impl IntoIterator<Item = &'r [usize]>) -> Result<Vec<Row>, EvalError> {
        let n = self.a.size();
        let mut out = Vec::new();
        for r in rows {
            if r.len() != self.compiled.team_width {
                return Err(EvalError::TeamMismatch(format!(
                    "row of length {} for {} variables",
                    r.len(),
                    self.compiled.team_width
                )));
            }
            let mut row = vec![0u32; self.compiled.width];
            for (slot, &x) in row.iter_mut().zip(r) {
                if x >= n {
                    return Err(EvalError::ValueOutOfRange { value: x, n });
                }
                *slot = x as u32;
            }
            out.push(row);
        }
        Ok(normalize(out))
    }

    fn run(&self) -> Run<'_> {
        Run::new(&self.compiled, self.a, self.strategy, self.budget)
    }

    fn check_team(&self, team: &Team) -> Result<(), EvalError> {
        if team.vars() != self.vars.as_slice() {
            return Err(EvalError::TeamMismatch(format!(
                "prepared for {:?}, got {:?}",
                self.vars,
                team.vars()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, team: &Team) -> Result<bool, EvalError> {
        self.check_team(team)?;
        self.eval_rows(team.rows().iter().map(Vec::as_slice))
    }

    pub fn eval_rows<'r>(&self, rows: impl IntoIterator<Item = &'r [usize]>) -> Result<bool, EvalError> {
        let rows = self.rows(rows)?;
        let run = self.run();
        run.sat(run.root(), &rows)
    }

    /// Evaluation together with the number of search steps taken.
    pub fn eval_counting_steps(&self, team: &Team) -> Result<(bool, u64), EvalError> {
        self.check_team(team)?;
        let rows = self.rows(team.rows().iter().map(Vec::as_slice))?;
        let run = self.run();
        let v = run.sat(run.root(), &rows)?;
        Ok((v, run.steps()))
    }

    /// Evaluates on `b` instead of the structure used for preparation. `b`
    /// must have the same domain size and relation layout.
    pub(crate) fn eval_rows_on<'r>(
        &self,
        b: &Structure,
        rows: impl IntoIterator<Item = &'r [usize]>,
    ) -> Result<bool, EvalError> {
        debug_assert_eq!(b.size(), self.a.size());
        debug_assert_eq!(b.vocabulary(), self.a.vocabulary());
        let rows = self.rows(rows)?;
        let run = Run::new(&self.compiled, b, self.strategy, self.budget);
        run.sat(run.root(), &rows)
    }

    pub fn max_subteam(&self, team: &Team) -> Result<Team, EvalError> {
        self.check_team(team)?;
        let rows = self.max_subteam_rows(team.rows().iter().map(Vec::as_slice))?;
        Ok(team.with_rows(rows.into_iter().collect()))
    }

    pub fn max_subteam_rows<'r>(
        &self,
        rows: impl IntoIterator<Item = &'r [usize]>,
    ) -> Result<Vec<Vec<usize>>, EvalError> {
        if !self.is_union_closed() {
            return Err(EvalError::NotUnionClosed);
        }
        let rows = self.rows(rows)?;
        let run = self.run();
        let m = run.maxsub(run.root(), &rows)?;
        let w = self.compiled.team_width;
        Ok(m.into_iter()
            .map(|r| r[..w].iter().map(|&x| x as usize).collect())
            .collect())
    }
}

/// Truth of `f` on `team` under lax team semantics.
pub fn eval(a: &Structure, team: &Team, f: &Formula) -> Result<bool, EvalError> {
    Evaluator::new(a).eval(team, f)
}

/// Ordinary first-order truth of `f` under `s`.
pub fn eval_tarski(a: &Structure, s: &Assignment, f: &Formula) -> Result<bool, EvalError> {
    let vars: Vec<Var> = s.vars().cloned().collect();
    let row: Vec<usize> = s.iter().map(|(_, x)| x).collect();
    let p = Evaluator::new(a).prepare(&vars, f)?;
    if !p.is_first_order() {
        return Err(EvalError::DependencyAtom);
    }
    let mut rows = p.rows([row.as_slice()])?;
    let run = p.run();
    Ok(run.tarski(run.root(), &mut rows[0]))
}

/// The union of all subteams of `team` satisfying the union-closed `f`.
pub fn max_subteam(a: &Structure, team: &Team, f: &Formula) -> Result<Team, EvalError> {
    Evaluator::new(a).max_subteam(team, f)
}
