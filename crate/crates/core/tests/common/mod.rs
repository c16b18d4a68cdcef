//! Random instance generators and brute-force oracles shared by the
//! integration tests. Oracles here use only the definitions, never the
//! library's counting or reduction code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use teamcount::chain::{BipartiteGraph, Edge};
use teamcount::cnf::{Lit, QbFormula, VarId};
use teamcount::eval::{Evaluator, Strategy};
use teamcount::formula::{check_normal_form_over, AtomKind, Formula, NormalFormDescriptor, Var};
use teamcount::structure::{Structure, Team};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(name: &str) -> Var {
    Var::new(name)
}

pub fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |a| {
                    let mut t = t.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn random_structure(rng: &mut impl Rng, n: usize, vocabulary: &[(&str, usize)], density: f64) -> Structure {
    let mut a = Structure::new(n).unwrap();
    for &(name, arity) in vocabulary {
        a.add_relation(name, arity).unwrap();
        for t in tuples(n, arity) {
            if rng.gen_bool(density) {
                a.insert(name, &t).unwrap();
            }
        }
    }
    a
}

/// Which atoms a random formula may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Logic {
    Fo,
    Dependence,
    Inclusion,
    Independence,
    /// Dependence, inclusion and independence atoms together.
    Mixed,
}

pub struct FormulaGen {
    pub logic: Logic,
    pub depth: usize,
    pub quantifiers: usize,
    /// Unary and binary relation names.
    pub unary: &'static str,
    pub binary: &'static str,
}

impl FormulaGen {
    pub fn new(logic: Logic, depth: usize, quantifiers: usize) -> Self {
        FormulaGen {
            logic,
            depth,
            quantifiers,
            unary: "R",
            binary: "S",
        }
    }

    pub fn generate(&self, rng: &mut impl Rng, free: &[Var]) -> Formula {
        let pool = ["u", "w", "z"];
        let mut scope = free.to_vec();
        self.node(rng, &mut scope, &pool, self.depth, self.quantifiers)
    }

    fn pick(rng: &mut impl Rng, scope: &[Var], len: usize) -> Vec<Var> {
        (0..len).map(|_| scope.choose(rng).unwrap().clone()).collect()
    }

    fn atom(&self, rng: &mut impl Rng, scope: &[Var]) -> Formula {
        let team_atom = match self.logic {
            Logic::Fo => None,
            Logic::Dependence => Some(0),
            Logic::Inclusion => Some(1),
            Logic::Independence => Some(2),
            Logic::Mixed => Some(rng.gen_range(0..3)),
        };
        if let Some(kind) = team_atom {
            if rng.gen_bool(0.45) {
                let len = rng.gen_range(0..=2);
                return match kind {
                    0 => Formula::dep(Self::pick(rng, scope, len), Self::pick(rng, scope, 1).remove(0)),
                    1 => {
                        let len = len.max(1);
                        Formula::inc(Self::pick(rng, scope, len), Self::pick(rng, scope, len))
                    }
                    _ => {
                        let (a, b) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
                        let given = Self::pick(rng, scope, len.min(1));
                        Formula::ind(Self::pick(rng, scope, a), given, Self::pick(rng, scope, b))
                    }
                };
            }
        }
        let positive = rng.gen_bool(0.6);
        match rng.gen_range(0..3) {
            0 => {
                let args = Self::pick(rng, scope, 1);
                if positive {
                    Formula::rel(self.unary, args)
                } else {
                    Formula::not_rel(self.unary, args)
                }
            }
            1 => {
                let args = Self::pick(rng, scope, 2);
                if positive {
                    Formula::rel(self.binary, args)
                } else {
                    Formula::not_rel(self.binary, args)
                }
            }
            _ => {
                let xy = Self::pick(rng, scope, 2);
                if positive {
                    Formula::eq(xy[0].clone(), xy[1].clone())
                } else {
                    Formula::neq(xy[0].clone(), xy[1].clone())
                }
            }
        }
    }

    fn node(&self, rng: &mut impl Rng, scope: &mut Vec<Var>, pool: &[&str], depth: usize, quants: usize) -> Formula {
        if scope.is_empty() || depth == 0 || rng.gen_bool(0.25) {
            if scope.is_empty() {
                let x = Var::new(pool[0]);
                return Formula::exists(x.clone(), Formula::eq(x.clone(), x));
            }
            return self.atom(rng, scope);
        }
        let unused: Vec<&str> = pool.iter().copied().filter(|p| !scope.contains(&Var::new(p))).collect();
        match rng.gen_range(0..4) {
            0 | 1 if quants > 0 && !unused.is_empty() => {
                let x = Var::new(unused[0]);
                scope.push(x.clone());
                let body = self.node(rng, scope, pool, depth - 1, quants - 1);
                scope.pop();
                if rng.gen_bool(0.5) {
                    Formula::exists(x, body)
                } else {
                    Formula::forall(x, body)
                }
            }
            2 => Formula::and(
                self.node(rng, scope, pool, depth - 1, quants / 2),
                self.node(rng, scope, pool, depth - 1, quants / 2),
            ),
            _ => Formula::or(
                self.node(rng, scope, pool, depth - 1, quants / 2),
                self.node(rng, scope, pool, depth - 1, quants / 2),
            ),
        }
    }
}

pub fn random_team(rng: &mut impl Rng, vars: &[Var], n: usize, max_rows: usize) -> Team {
    let all = tuples(n, vars.len());
    let size = rng.gen_range(0..=max_rows.min(all.len()));
    let rows: Vec<Vec<usize>> = all.choose_multiple(rng, size).cloned().collect();
    Team::from_rows(vars.to_vec(), rows).unwrap()
}

pub fn subteams(team: &Team) -> Vec<Team> {
    let rows: Vec<&Vec<usize>> = team.rows().iter().collect();
    (0u32..1 << rows.len())
        .map(|mask| {
            let sub: BTreeSet<Vec<usize>> = rows
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, r)| (*r).clone())
                .collect();
            team.with_rows(sub)
        })
        .collect()
}

pub fn definitional(a: &Structure) -> Evaluator<'_> {
    Evaluator::new(a).with_strategy(Strategy::Definitional).with_budget(1 << 16)
}

/// Nonempty teams over `vars` satisfying `f`, by evaluating every team.
pub fn brute_count_teams(a: &Structure, f: &Formula, vars: &[Var]) -> u64 {
    let full = Team::full(vars.to_vec(), a.size()).unwrap();
    let ev = Evaluator::new(a);
    subteams(&full)
        .into_iter()
        .filter(|t| !t.is_empty() && ev.eval(t, f).unwrap())
        .count() as u64
}

/// Some nonempty satisfying team over `vars` with a nonempty subteam that
/// fails `f`.
pub fn downward_witness(a: &Structure, f: &Formula, vars: &[Var]) -> Option<(Team, Team)> {
    let full = Team::full(vars.to_vec(), a.size()).unwrap();
    let ev = Evaluator::new(a);
    for t in subteams(&full) {
        if t.is_empty() || !ev.eval(&t, f).unwrap() {
            continue;
        }
        if let Some(s) = subteams(&t).into_iter().find(|s| !s.is_empty() && !ev.eval(s, f).unwrap()) {
            return Some((t, s));
        }
    }
    None
}

/// Union of all satisfying subteams.
pub fn brute_max_subteam(a: &Structure, team: &Team, f: &Formula) -> Team {
    let ev = Evaluator::new(a);
    let mut rows = BTreeSet::new();
    for t in subteams(team) {
        if ev.eval(&t, f).unwrap() {
            rows.extend(t.rows().iter().cloned());
        }
    }
    team.with_rows(rows)
}

fn assignment(num_vars: u32, mask: u64) -> Vec<bool> {
    (0..num_vars).map(|i| mask >> i & 1 == 1).collect()
}

fn satisfies(f: &QbFormula, a: &[bool]) -> bool {
    f.clauses()
        .iter()
        .all(|c| c.iter().any(|l| a[l.var() as usize - 1] == l.is_positive()))
}

/// Models of the matrix over all variables.
pub fn brute_all(f: &QbFormula) -> u64 {
    (0..1u64 << f.num_vars())
        .filter(|&m| satisfies(f, &assignment(f.num_vars(), m)))
        .count() as u64
}

/// Free-variable assignments with a satisfying extension; `star` drops the
/// all-zero one.
pub fn brute_projected(f: &QbFormula, star: bool) -> u64 {
    let free = f.free_vars();
    let mut seen = BTreeSet::new();
    for m in 0..1u64 << f.num_vars() {
        let a = assignment(f.num_vars(), m);
        if satisfies(f, &a) {
            let proj: Vec<bool> = free.iter().map(|&v| a[v as usize - 1]).collect();
            if !(star && proj.iter().all(|&b| !b)) {
                seen.insert(proj);
            }
        }
    }
    seen.len() as u64
}

/// A random prefix CNF. Free variables occur only negatively when
/// `negative_free` is set; `dual_horn` keeps at most one negative literal
/// per clause.
pub struct CnfGen {
    pub vars: u32,
    pub clauses: usize,
    pub width: usize,
    pub bound: u32,
    pub negative_free: bool,
    pub dual_horn: bool,
}

impl CnfGen {
    pub fn generate(&self, rng: &mut impl Rng) -> QbFormula {
        let bound: Vec<VarId> = (self.vars - self.bound + 1..=self.vars).collect();
        let mut clauses = Vec::new();
        for _ in 0..self.clauses {
            let len = rng.gen_range(1..=self.width);
            let mut c: Vec<Lit> = Vec::new();
            let mut negs = 0;
            for _ in 0..len {
                let var = rng.gen_range(1..=self.vars);
                if c.iter().any(|l| l.var() == var) {
                    continue;
                }
                let free = !bound.contains(&var);
                let mut positive = rng.gen_bool(0.5);
                if free && self.negative_free {
                    positive = false;
                }
                if !positive && self.dual_horn && negs == 1 {
                    if free && self.negative_free {
                        continue;
                    }
                    positive = true;
                }
                negs += usize::from(!positive);
                c.push(Lit::new(var, positive));
            }
            clauses.push(c);
        }
        QbFormula::new(self.vars, clauses, bound).unwrap()
    }
}

pub fn random_bigraph(rng: &mut impl Rng, left: usize, right: usize, max_edges: usize) -> BipartiteGraph {
    let mut pairs: Vec<(usize, usize)> = (0..left).flat_map(|i| (0..right).map(move |j| (i, j))).collect();
    pairs.shuffle(rng);
    let count = rng.gen_range(0..=max_edges.min(pairs.len()));
    let mut chosen = pairs[..count].to_vec();
    chosen.sort();
    let edges = chosen
        .iter()
        .map(|&(i, j)| Edge {
            name: format!("a{i}b{j}"),
            from: i,
            to: j,
        })
        .collect();
    BipartiteGraph::new(
        (0..left).map(|i| format!("a{i}")).collect(),
        (0..right).map(|j| format!("b{j}")).collect(),
        edges,
    )
    .unwrap()
}

/// Matchings of `g` accepted by `accept`, indexed by size, from every edge
/// subset.
pub fn brute_matchings_by_size(g: &BipartiteGraph, accept: impl Fn(&[bool]) -> bool) -> Vec<u64> {
    let mut out = vec![0u64; g.left.len() + 1];
    for mask in 0u64..1 << g.edges.len() {
        let sel: Vec<bool> = (0..g.edges.len()).map(|i| mask >> i & 1 == 1).collect();
        let mut l = BTreeSet::new();
        let mut r = BTreeSet::new();
        let ok = g
            .edges
            .iter()
            .zip(&sel)
            .filter(|(_, &s)| s)
            .all(|(e, _)| l.insert(e.from) && r.insert(e.to));
        if ok && accept(&sel) {
            out[sel.iter().filter(|&&b| b).count()] += 1;
        }
    }
    out
}

/// Companion acceptance by brute force over bound variables.
pub fn brute_accepts(psi: &QbFormula, solution: &[bool]) -> bool {
    let s = solution.len() as u32;
    let extra = psi.num_vars().saturating_sub(s);
    (0..1u64 << extra).any(|m| {
        let mut a = solution.to_vec();
        a.resize(psi.num_vars() as usize, false);
        for i in 0..extra {
            a[(s + i) as usize] = m >> i & 1 == 1;
        }
        satisfies(psi, &a)
    })
}

/// A normal form `A ȳ. E z̄. (atoms & θ)` over the free tuple `free`.
pub fn random_normal_form(
    rng: &mut impl Rng,
    kind: AtomKind,
    free: &[Var],
    universal: usize,
    existential: usize,
) -> (Formula, NormalFormDescriptor) {
    let ys: Vec<Var> = (1..=universal).map(|i| Var::new(format!("y{i}"))).collect();
    let zs: Vec<Var> = (1..=existential).map(|i| Var::new(format!("z{i}"))).collect();
    let leaf: Vec<Var> = free.iter().chain(&ys).chain(&zs).cloned().collect();
    let mut parts = Vec::new();
    match kind {
        AtomKind::Dependence => {
            for z in &zs {
                if !ys.is_empty() && rng.gen_bool(0.7) {
                    let mut det: Vec<Var> = ys.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
                    if det.is_empty() {
                        det.push(ys.choose(rng).unwrap().clone());
                    }
                    parts.push(Formula::dep(det, z.clone()));
                }
            }
        }
        AtomKind::Inclusion => {
            for _ in 0..rng.gen_range(0..=2) {
                let len = rng.gen_range(1..=2);
                let pick = |rng: &mut ChaCha8Rng| -> Vec<Var> {
                    (0..len).map(|_| leaf.choose(rng).unwrap().clone()).collect()
                };
                let mut r = ChaCha8Rng::seed_from_u64(rng.gen());
                parts.push(Formula::inc(pick(&mut r), pick(&mut r)));
            }
        }
    }
    if rng.gen_bool(0.8) {
        let gen = FormulaGen::new(Logic::Fo, 2, 0);
        parts.push(gen.generate(rng, &leaf));
    }
    let body = Formula::and_all(parts).unwrap_or_else(|| Formula::eq(leaf[0].clone(), leaf[0].clone()));
    let f = Formula::forall_all(&ys, Formula::exists_all(&zs, body));
    let d = check_normal_form_over(&f, kind, free).unwrap();
    (f, d)
}
