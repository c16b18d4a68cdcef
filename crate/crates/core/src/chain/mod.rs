//! Counting problems paired with a companion formula, and the reduction
//! chain from prefix 3CNF through cycle covers and matchings to 2CNF.

mod graph;
mod linalg;
mod steps;

use std::fmt;

use num_bigint::BigUint;
use rayon::prelude::*;
use thiserror::Error;

use crate::cnf::{CnfError, QbFormula};
use crate::count::{checked_space, is_satisfiable, CountError, CountOptions, CountResult, CountStats};

pub use graph::{parse_graph, write_graph, BipartiteGraph, Digraph, Edge, Graph};
pub use linalg::{residual, solve_linear, solve_vandermonde, vandermonde};
pub use steps::{
    build_gk, cc_to_pm, clause_restrict, combine, im_to_2cnf_neg, junction_formula, matching_size_counts,
    pm_to_im_interpolate, split_sigma1_3cnf, Interpolation, MatchingOracle, SearchMatchingOracle, Split,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("graph: {0}")]
    Graph(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("companion formula: {0}")]
    Companion(String),
    #[error("{0}")]
    Kind(String),
    #[error("formula is not {0}")]
    Class(&'static str),
    #[error("linear system is singular")]
    Singular,
    #[error("oracle fault: {0}")]
    OracleFault(String),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Count(#[from] CountError),
}

/// The combinatorial object whose solutions are counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Carrier {
    Directed(Digraph),
    Bipartite(BipartiteGraph),
    /// A quantifier-free CNF; solutions are its models.
    Cnf(QbFormula),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionKind {
    CycleCover,
    Matching,
    PerfectMatching,
    Model,
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionKind::CycleCover => "cycle-cover",
            SolutionKind::Matching => "matching",
            SolutionKind::PerfectMatching => "perfect-matching",
            SolutionKind::Model => "model",
        })
    }
}

/// A carrier problem whose solutions are filtered by a companion formula.
///
/// Solution variables are the carrier's edges in order, or its CNF
/// variables; they are the companion's ids `1..=s`, all free, and every
/// bound variable of the companion has an id above `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedInstance {
    carrier: Carrier,
    kind: SolutionKind,
    companion: QbFormula,
}

impl PairedInstance {
    pub fn new(carrier: Carrier, kind: SolutionKind, companion: QbFormula) -> Result<Self, ChainError> {
        let ok = matches!(
            (&carrier, kind),
            (Carrier::Directed(_), SolutionKind::CycleCover)
                | (Carrier::Bipartite(_), SolutionKind::Matching | SolutionKind::PerfectMatching)
                | (Carrier::Cnf(_), SolutionKind::Model)
        );
        if !ok {
            return Err(ChainError::Kind(format!("{kind} is not a solution kind of this carrier")));
        }
        if let Carrier::Cnf(f) = &carrier {
            if !f.bound().is_empty() {
                return Err(ChainError::Class("a quantifier-free CNF"));
            }
        }
        let s = solution_vars(&carrier);
        let companion = fit_companion(companion, s)?;
        let flags = companion.classify();
        if !flags.cnf_neg || flags.width > 3 {
            return Err(ChainError::Companion(format!("must be Σ1 3CNF-, got {flags}")));
        }
        Ok(PairedInstance {
            carrier,
            kind,
            companion,
        })
    }

    /// The companion that accepts every solution.
    pub fn unconstrained(carrier: Carrier, kind: SolutionKind) -> Result<Self, ChainError> {
        let s = solution_vars(&carrier);
        Self::new(carrier, kind, QbFormula::quantifier_free(s, vec![])?)
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn kind(&self) -> SolutionKind {
        self.kind
    }

    pub fn companion(&self) -> &QbFormula {
        &self.companion
    }

    pub fn solution_vars(&self) -> u32 {
        solution_vars(&self.carrier)
    }

    pub fn is_solution(&self, selected: impl Fn(usize) -> bool) -> bool {
        match (&self.carrier, self.kind) {
            (Carrier::Directed(g), _) => g.is_cycle_cover(selected),
            (Carrier::Bipartite(g), SolutionKind::Matching) => g.is_matching(selected),
            (Carrier::Bipartite(g), _) => g.is_perfect_matching(selected),
            (Carrier::Cnf(f), _) => f
                .clauses()
                .iter()
                .all(|c| c.iter().any(|l| selected(l.var() as usize - 1) == l.is_positive())),
        }
    }

    /// Whether the companion has a model extending the given values of the
    /// solution variables.
    pub fn companion_accepts(&self, selected: impl Fn(usize) -> bool) -> bool {
        let s = self.solution_vars();
        let mut residual = Vec::new();
        for c in self.companion.clauses() {
            let mut rest = Vec::new();
            let mut sat = false;
            for &l in c {
                if l.var() <= s {
                    sat |= selected(l.var() as usize - 1) == l.is_positive();
                } else {
                    rest.push(l);
                }
            }
            if sat {
                continue;
            }
            if rest.is_empty() {
                return false;
            }
            residual.push(rest);
        }
        residual.is_empty()
            || is_satisfiable(&QbFormula::quantifier_free(self.companion.num_vars(), residual).expect("same ids"))
    }
}

fn solution_vars(c: &Carrier) -> u32 {
    match c {
        Carrier::Directed(g) => g.edges.len() as u32,
        Carrier::Bipartite(g) => g.edges.len() as u32,
        Carrier::Cnf(f) => f.num_vars(),
    }
}

fn fit_companion(psi: QbFormula, s: u32) -> Result<QbFormula, ChainError> {
    if let Some(v) = psi.bound_vars().into_iter().find(|&v| v <= s) {
        return Err(ChainError::Companion(format!("solution variable {v} is bound")));
    }
    if let Some(v) = psi.free_vars().into_iter().find(|&v| v > s) {
        return Err(ChainError::Companion(format!(
            "free variable {v} is not one of the {s} solution variables"
        )));
    }
    if psi.num_vars() < s {
        return Ok(QbFormula::quantifier_free(s, psi.clauses().to_vec())?);
    }
    Ok(psi)
}

struct Search<'a> {
    nodes: u64,
    budget: u64,
    selected: Vec<bool>,
    visit: &'a mut dyn FnMut(&[bool]),
}

impl Search<'_> {
    fn step(&mut self) -> Result<(), ChainError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(CountError::Budget {
                needed: "more search nodes".into(),
                budget: self.budget,
            }
            .into());
        }
        Ok(())
    }

    // Left vertex `i` takes no edge or one edge to a free right vertex.
    fn matchings(&mut self, g: &BipartiteGraph, by_left: &[Vec<usize>], used: &mut [bool], i: usize, perfect: bool) -> Result<(), ChainError> {
        self.step()?;
        if i == by_left.len() {
            (self.visit)(&self.selected);
            return Ok(());
        }
        if !perfect {
            self.matchings(g, by_left, used, i + 1, perfect)?;
        }
        for &e in &by_left[i] {
            let r = g.edges[e].to;
            if !used[r] {
                used[r] = true;
                self.selected[e] = true;
                self.matchings(g, by_left, used, i + 1, perfect)?;
                self.selected[e] = false;
                used[r] = false;
            }
        }
        Ok(())
    }

    // Vertex `v` takes one outgoing edge to a vertex with no incoming edge yet.
    fn cycle_covers(&mut self, g: &Digraph, by_source: &[Vec<usize>], used: &mut [bool], v: usize) -> Result<(), ChainError> {
        self.step()?;
        if v == by_source.len() {
            (self.visit)(&self.selected);
            return Ok(());
        }
        for &e in &by_source[v] {
            let t = g.edges[e].to;
            if !used[t] {
                used[t] = true;
                self.selected[e] = true;
                self.cycle_covers(g, by_source, used, v + 1)?;
                self.selected[e] = false;
                used[t] = false;
            }
        }
        Ok(())
    }
}

fn incident(count: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); count];
    for (i, e) in edges.iter().enumerate() {
        out[e.from].push(i);
    }
    out
}

/// Calls `visit` with the characteristic vector of every matching of `g`
/// (every perfect matching with `perfect`). Returns the search nodes used.
pub fn for_each_matching(
    g: &BipartiteGraph,
    perfect: bool,
    budget: u64,
    visit: &mut dyn FnMut(&[bool]),
) -> Result<u64, ChainError> {
    if perfect && g.left.len() != g.right.len() {
        return Ok(0);
    }
    let mut s = Search {
        nodes: 0,
        budget,
        selected: vec![false; g.edges.len()],
        visit,
    };
    s.matchings(g, &incident(g.left.len(), &g.edges), &mut vec![false; g.right.len()], 0, perfect)?;
    Ok(s.nodes)
}

/// Calls `visit` with the characteristic vector of every cycle cover of `g`.
pub fn for_each_cycle_cover(g: &Digraph, budget: u64, visit: &mut dyn FnMut(&[bool])) -> Result<u64, ChainError> {
    let mut s = Search {
        nodes: 0,
        budget,
        selected: vec![false; g.edges.len()],
        visit,
    };
    s.cycle_covers(g, &incident(g.vertices.len(), &g.edges), &mut vec![false; g.vertices.len()], 0)?;
    Ok(s.nodes)
}

/// Counts carrier solutions whose characteristic vector the companion
/// accepts. Matchings and cycle covers are enumerated by backtracking,
/// CNF models by trying every assignment.
pub fn count_paired(p: &PairedInstance, opts: &CountOptions) -> Result<CountResult, ChainError> {
    let mut count = 0u64;
    let mut visit = |sel: &[bool]| {
        if p.companion_accepts(|i| sel[i]) {
            count += 1;
        }
    };
    let nodes = match (&p.carrier, p.kind) {
        (Carrier::Bipartite(g), kind) => {
            for_each_matching(g, kind == SolutionKind::PerfectMatching, opts.budget, &mut visit)?
        }
        (Carrier::Directed(g), _) => for_each_cycle_cover(g, opts.budget, &mut visit)?,
        (Carrier::Cnf(_), _) => {
            let space = checked_space(u64::from(p.solution_vars()), opts.budget)?;
            let hit = |mask: u64| -> u64 {
                let sel = |i: usize| mask >> i & 1 == 1;
                u64::from(p.is_solution(sel) && p.companion_accepts(sel))
            };
            count = if opts.parallel {
                (0..space).into_par_iter().map(hit).sum()
            } else {
                (0..space).map(hit).sum()
            };
            space
        }
    };
    Ok(CountResult::new(
        BigUint::from(count),
        CountStats {
            nodes,
            oracle_calls: 0,
        },
    ))
}
