use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};

use super::graph::{BipartiteGraph, Edge};
use super::linalg::{residual, solve_vandermonde, vandermonde};
use super::{count_paired, for_each_matching, Carrier, ChainError, PairedInstance, SolutionKind};
use crate::cnf::{prenex_conjoin, Clause, Lit, QbFormula, VarId};
use crate::count::CountOptions;
use crate::{Count, Rational};

/// The literals of `c` whose variable lies in `vars`.
pub fn clause_restrict(c: &[Lit], vars: &BTreeSet<VarId>) -> Clause {
    c.iter().copied().filter(|l| vars.contains(&l.var())).collect()
}

/// Output of [`split_sigma1_3cnf`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// Quantifier-free 3CNF over the free variables (renumbered `1..=f`)
    /// followed by one variable `e_i` per mixed clause.
    pub phi: QbFormula,
    /// Companion over the same ids, with the bound variables after them.
    pub psi: QbFormula,
    /// Original id of each free variable of `phi`, in order.
    pub free: Vec<VarId>,
    /// Number of clauses mixing free and bound variables.
    pub mixed: usize,
}

impl Split {
    pub fn paired(&self) -> Result<PairedInstance, ChainError> {
        PairedInstance::new(Carrier::Cnf(self.phi.clone()), SolutionKind::Model, self.psi.clone())
    }
}

/// Separates a prefix 3CNF into a quantifier-free part and a companion
/// whose free variables occur only negatively. Clauses over free variables
/// go to `phi`, clauses over bound variables to `psi`, and each mixed clause
/// `E` gets a new variable `e` with `¬e ↔ E|free` in `phi` and `¬e ∨ E|bound`
/// in `psi`.
pub fn split_sigma1_3cnf(f: &QbFormula) -> Result<Split, ChainError> {
    if !f.classify().is_kcnf(3) {
        return Err(ChainError::Class("a 3CNF"));
    }
    let free = f.free_vars();
    let bound = f.bound_vars();
    let nf = free.len() as VarId;
    let mixed: Vec<&Clause> = f
        .clauses()
        .iter()
        .filter(|c| c.iter().any(|l| f.is_bound(l.var())) && c.iter().any(|l| !f.is_bound(l.var())))
        .collect();
    let r = mixed.len() as VarId;
    let mut map: BTreeMap<VarId, VarId> = free.iter().zip(1..).map(|(&v, i)| (v, i)).collect();
    map.extend(bound.iter().zip(nf + r + 1..).map(|(&v, i)| (v, i)));
    let m = |l: &Lit| Lit::new(map[&l.var()], l.is_positive());
    let free_set: BTreeSet<VarId> = free.iter().copied().collect();
    let bound_set: BTreeSet<VarId> = bound.iter().copied().collect();

    let mut phi = Vec::new();
    let mut psi = Vec::new();
    let mut e = nf;
    for c in f.clauses() {
        let fpart: Clause = clause_restrict(c, &free_set).iter().map(m).collect();
        let bpart: Clause = clause_restrict(c, &bound_set).iter().map(m).collect();
        if bpart.is_empty() {
            phi.push(fpart);
        } else if fpart.is_empty() {
            psi.push(bpart);
        } else {
            e += 1;
            for &l in &fpart {
                phi.push(vec![Lit::neg(e), l.negated()]);
            }
            let mut back = vec![Lit::pos(e)];
            back.extend(fpart);
            phi.push(back);
            let mut comp = vec![Lit::neg(e)];
            comp.extend(bpart);
            psi.push(comp);
        }
    }
    let total = nf + r + bound.len() as VarId;
    Ok(Split {
        phi: QbFormula::quantifier_free(nf + r, phi)?,
        psi: QbFormula::new(total, psi, nf + r + 1..=total)?,
        free,
        mixed: mixed.len(),
    })
}

/// Bipartite double cover: vertex `v` becomes `v` on the left and `v'` on
/// the right, and edge `(u, v)` becomes `{u, v'}` under the same name, so
/// the companion is unchanged. Cycle covers map to perfect matchings.
pub fn cc_to_pm(p: &PairedInstance) -> Result<PairedInstance, ChainError> {
    let Carrier::Directed(g) = p.carrier() else {
        return Err(ChainError::Kind("cycle-cover instance expected".into()));
    };
    let right = g.vertices.iter().map(|v| format!("{v}'")).collect();
    let b = BipartiteGraph::new(g.vertices.clone(), right, g.edges.clone())?;
    PairedInstance::new(Carrier::Bipartite(b), SolutionKind::PerfectMatching, p.companion().clone())
}

/// Adds `k` pendant vertices `v~1..v~k` on the right for every left vertex
/// `v`, each joined to `v` by an edge of the same name. The companion keeps
/// its clauses; its bound variables move up past the new edge variables.
/// The result counts all matchings.
pub fn build_gk(p: &PairedInstance, k: usize) -> Result<PairedInstance, ChainError> {
    let Carrier::Bipartite(g) = p.carrier() else {
        return Err(ChainError::Kind("bipartite instance expected".into()));
    };
    if k == 0 {
        return Err(ChainError::Kind("k must be positive".into()));
    }
    let mut right = g.right.clone();
    let mut edges = g.edges.clone();
    for (i, v) in g.left.iter().enumerate() {
        for j in 1..=k {
            let name = format!("{v}~{j}");
            right.push(name.clone());
            edges.push(Edge {
                name,
                from: i,
                to: right.len() - 1,
            });
        }
    }
    let added = (g.left.len() * k) as VarId;
    let psi = p.companion();
    let map: BTreeMap<VarId, VarId> = psi.bound_vars().into_iter().map(|v| (v, v + added)).collect();
    let psi = psi.renumber(psi.num_vars() + added, &map)?;
    let gk = BipartiteGraph::new(g.left.clone(), right, edges)?;
    PairedInstance::new(Carrier::Bipartite(gk), SolutionKind::Matching, psi)
}

/// Number of companion-accepted matchings of each size `0..=|left|`.
pub fn matching_size_counts(p: &PairedInstance, opts: &CountOptions) -> Result<Vec<Count>, ChainError> {
    let Carrier::Bipartite(g) = p.carrier() else {
        return Err(ChainError::Kind("bipartite instance expected".into()));
    };
    let mut out = vec![0u64; g.left.len() + 1];
    for_each_matching(g, false, opts.budget, &mut |sel| {
        if p.companion_accepts(|i| sel[i]) {
            out[sel.iter().filter(|&&b| b).count()] += 1;
        }
    })?;
    Ok(out.into_iter().map(Count::from).collect())
}

/// Anything that counts companion-accepted matchings of a bipartite
/// instance.
pub trait MatchingOracle {
    fn count_matchings(&mut self, p: &PairedInstance) -> Result<Count, ChainError>;
}

impl<F: FnMut(&PairedInstance) -> Result<Count, ChainError>> MatchingOracle for F {
    fn count_matchings(&mut self, p: &PairedInstance) -> Result<Count, ChainError> {
        self(p)
    }
}

/// Matching counting by exhaustive search.
#[derive(Debug, Clone, Copy, Default)]
pub struct SearchMatchingOracle {
    pub opts: CountOptions,
}

impl MatchingOracle for SearchMatchingOracle {
    fn count_matchings(&mut self, p: &PairedInstance) -> Result<Count, ChainError> {
        Ok(count_paired(p, &self.opts)?.count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpolation {
    /// Companion-accepted perfect matchings.
    pub value: Count,
    /// `A'_r`: accepted matchings leaving `r` left vertices unmatched.
    pub coefficients: Vec<Count>,
    /// `(k, matchings of G_k)` for every query.
    pub queries: Vec<(usize, Count)>,
}

/// Recovers the number of companion-accepted perfect matchings from
/// matching counts of `G_1 .. G_{|left|+1}`: the count for `G_k` is
/// `Σ_r A'_r (k+1)^r`, a Vandermonde system in the `A'_r`, solved exactly.
pub fn pm_to_im_interpolate(
    p: &PairedInstance,
    oracle: &mut dyn MatchingOracle,
) -> Result<Interpolation, ChainError> {
    let Carrier::Bipartite(g) = p.carrier() else {
        return Err(ChainError::Kind("bipartite instance expected".into()));
    };
    let n1 = g.left.len();
    let mut queries = Vec::new();
    for k in 1..=n1 + 1 {
        queries.push((k, oracle.count_matchings(&build_gk(p, k)?)?));
    }
    let nodes: Vec<Rational> = (2..=n1 as i64 + 2).map(|t| Rational::from_integer(t.into())).collect();
    let values: Vec<Rational> = queries
        .iter()
        .map(|(_, c)| Rational::from_integer(BigInt::from(c.clone())))
        .collect();
    let x = solve_vandermonde(&nodes, &values).ok_or(ChainError::Singular)?;
    if residual(&vandermonde(&nodes), &x, &values).iter().any(|r| !r.is_zero()) {
        return Err(ChainError::Singular);
    }
    let mut coefficients = Vec::with_capacity(x.len());
    for c in &x {
        if !c.is_integer() || c.is_negative() {
            return Err(ChainError::OracleFault(format!("coefficient {c} is not a count")));
        }
        coefficients.push(c.to_integer().to_biguint().expect("nonnegative"));
    }
    let value = if n1 == g.right.len() {
        coefficients[0].clone()
    } else {
        BigUint::zero()
    };
    Ok(Interpolation {
        value,
        coefficients,
        queries,
    })
}

/// Matchings as models: one clause `¬e ∨ ¬f` per unordered pair of edges
/// sharing an endpoint. The companion is unchanged.
pub fn im_to_2cnf_neg(p: &PairedInstance) -> Result<PairedInstance, ChainError> {
    let Carrier::Bipartite(g) = p.carrier() else {
        return Err(ChainError::Kind("bipartite instance expected".into()));
    };
    if p.kind() != SolutionKind::Matching {
        return Err(ChainError::Kind("matching instance expected".into()));
    }
    let clauses = g
        .conflicting_pairs()
        .into_iter()
        .map(|(i, j)| vec![Lit::neg(i as VarId + 1), Lit::neg(j as VarId + 1)])
        .collect();
    let phi = QbFormula::quantifier_free(g.edges.len() as VarId, clauses)?;
    PairedInstance::new(Carrier::Cnf(phi), SolutionKind::Model, p.companion().clone())
}

/// The single prefix formula `φ ∧ ψ` of a CNF-carrier instance; its
/// projected count is the paired count.
pub fn combine(p: &PairedInstance) -> Result<QbFormula, ChainError> {
    let Carrier::Cnf(phi) = p.carrier() else {
        return Err(ChainError::Kind("CNF instance expected".into()));
    };
    Ok(prenex_conjoin(phi, p.companion(), true)?)
}

/// `ψ ∧ ⋀ (¬j1 ∨ ¬j2)` over the given pairs of solution variables.
pub fn junction_formula(psi: &QbFormula, pairs: &[(VarId, VarId)]) -> Result<QbFormula, ChainError> {
    let mut out = psi.clone();
    for &(a, b) in pairs {
        out.push_clause(vec![Lit::neg(a), Lit::neg(b)])?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Digraph;
    use crate::count::{count_assignments, CountMode};

    fn edge(name: &str, from: usize, to: usize) -> Edge {
        Edge {
            name: name.into(),
            from,
            to,
        }
    }

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn restriction() {
        let c = vec![Lit::pos(1), Lit::neg(3), Lit::pos(2)];
        assert_eq!(clause_restrict(&c, &BTreeSet::from([1, 2])), vec![Lit::pos(1), Lit::pos(2)]);
        assert!(clause_restrict(&c, &BTreeSet::from([7])).is_empty());
        assert_eq!(clause_restrict(&c, &BTreeSet::from([1, 2, 3])), c);
    }

    #[test]
    fn split_mixed_clause() {
        // x1 free, y1 y2 bound as ids 2 3.
        let f = QbFormula::from_ints(3, &[&[1, 2, 3]], &[2, 3]);
        let s = split_sigma1_3cnf(&f).unwrap();
        assert_eq!(s.mixed, 1);
        // e = 2; φ' = (¬e ∨ ¬x1) ∧ (e ∨ x1); ψ = (¬e ∨ y1 ∨ y2).
        assert_eq!(s.phi, QbFormula::from_ints(2, &[&[-2, -1], &[2, 1]], &[]));
        assert_eq!(s.psi, QbFormula::from_ints(4, &[&[-2, 3, 4]], &[3, 4]));
        let paired = count_paired(&s.paired().unwrap(), &CountOptions::default()).unwrap();
        assert_eq!(paired.count, count_assignments(&f, CountMode::Projected).count);
    }

    #[test]
    fn split_free_only() {
        let f = QbFormula::from_ints(2, &[&[1, -2]], &[]);
        let s = split_sigma1_3cnf(&f).unwrap();
        assert_eq!(s.phi.clauses(), f.clauses());
        assert!(s.psi.clauses().is_empty());
    }

    #[test]
    fn double_cover_of_two_cycle() {
        let g = Digraph::new(names(&["1", "2"]), vec![edge("a", 0, 1), edge("b", 1, 0)]).unwrap();
        let p = PairedInstance::unconstrained(Carrier::Directed(g), SolutionKind::CycleCover).unwrap();
        let q = cc_to_pm(&p).unwrap();
        let Carrier::Bipartite(b) = q.carrier() else { panic!() };
        assert_eq!(b.right, names(&["1'", "2'"]));
        assert_eq!((b.edges[0].from, b.edges[0].to), (0, 1));
        let opts = CountOptions::default();
        assert_eq!(count_paired(&q, &opts).unwrap().count, count_paired(&p, &opts).unwrap().count);
    }

    #[test]
    fn gk_on_single_edge() {
        let g = BipartiteGraph::new(names(&["a"]), names(&["b"]), vec![edge("e", 0, 0)]).unwrap();
        let p = PairedInstance::unconstrained(Carrier::Bipartite(g), SolutionKind::PerfectMatching).unwrap();
        let opts = CountOptions::default();
        assert_eq!(count_paired(&build_gk(&p, 1).unwrap(), &opts).unwrap().count, 3u32.into());
        assert_eq!(count_paired(&build_gk(&p, 2).unwrap(), &opts).unwrap().count, 4u32.into());
        let r = pm_to_im_interpolate(&p, &mut SearchMatchingOracle::default()).unwrap();
        assert_eq!(r.value, 1u32.into());
    }

    #[test]
    fn interpolation_with_forbidden_edge() {
        let g = BipartiteGraph::new(
            names(&["a1", "a2"]),
            names(&["b1", "b2"]),
            vec![edge("a1b1", 0, 0), edge("a2b2", 1, 1), edge("a1b2", 0, 1)],
        )
        .unwrap();
        let psi = QbFormula::from_ints(3, &[&[-3]], &[]);
        let p = PairedInstance::new(Carrier::Bipartite(g), SolutionKind::PerfectMatching, psi).unwrap();
        let r = pm_to_im_interpolate(&p, &mut SearchMatchingOracle::default()).unwrap();
        assert_eq!(r.value, 1u32.into());
        assert_eq!(r.value, count_paired(&p, &CountOptions::default()).unwrap().count);
    }

    #[test]
    fn matchings_as_negative_2cnf() {
        let g = BipartiteGraph::new(names(&["a", "c"]), names(&["b"]), vec![edge("e1", 0, 0), edge("e2", 1, 0)]).unwrap();
        let p = PairedInstance::unconstrained(Carrier::Bipartite(g), SolutionKind::Matching).unwrap();
        let q = im_to_2cnf_neg(&p).unwrap();
        let Carrier::Cnf(phi) = q.carrier() else { panic!() };
        assert_eq!(phi.clauses(), &[vec![Lit::neg(1), Lit::neg(2)]]);
        let opts = CountOptions::default();
        assert_eq!(count_paired(&q, &opts).unwrap().count, 3u32.into());
        let f = combine(&q).unwrap();
        assert!(f.classify().cnf_neg);
        assert_eq!(count_assignments(&f, CountMode::Projected).count, 3u32.into());
    }

    #[test]
    fn junction_adds_negative_pairs() {
        let psi = QbFormula::from_ints(3, &[], &[]);
        let j = junction_formula(&psi, &[(1, 2)]).unwrap();
        assert_eq!(j.clauses(), &[vec![Lit::neg(1), Lit::neg(2)]]);
    }
}
