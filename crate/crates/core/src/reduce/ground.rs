use std::collections::{BTreeMap, HashSet};

use super::ReduceError;
use crate::cnf::{write_dimacs_with_comments, Clause, Lit, QbFormula, VarId};
use crate::eval::Evaluator;
use crate::formula::{AtomKind, NormalAtom, NormalFormDescriptor, Var};
use crate::structure::Structure;

/// A propositional variable `X_s` standing for the partial assignment `s`
/// to the first `s.len()` leaf variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexedPropVar {
    pub index: Vec<usize>,
    pub id: VarId,
}

/// Numbering of `X_s` for `s ∈ A^m ∪ … ∪ A^{m+depth}`: layer by layer, each
/// layer in lexicographic order, starting at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropVarLayers {
    n: usize,
    m: usize,
    /// `offsets[i]` is the number of ids used by layers `m..m+i`.
    offsets: Vec<u64>,
}

impl PropVarLayers {
    pub fn new(n: usize, m: usize, depth: usize) -> Result<Self, ReduceError> {
        let mut offsets = vec![0u64];
        let mut size = (n as u64)
            .checked_pow(m as u32)
            .ok_or(ReduceError::TooLarge)?;
        for _ in 0..=depth {
            let next = offsets.last().unwrap().checked_add(size).ok_or(ReduceError::TooLarge)?;
            if next > i32::MAX as u64 {
                return Err(ReduceError::TooLarge);
            }
            offsets.push(next);
            size = size.saturating_mul(n as u64);
        }
        Ok(PropVarLayers { n, m, offsets })
    }

    pub fn depth(&self) -> usize {
        self.offsets.len() - 2
    }

    pub fn num_vars(&self) -> VarId {
        *self.offsets.last().unwrap() as VarId
    }

    /// First id of the layer holding assignments of length `m + i`.
    pub fn offset(&self, i: usize) -> VarId {
        self.offsets[i] as VarId + 1
    }

    pub fn layer_len(&self, i: usize) -> usize {
        (self.offsets[i + 1] - self.offsets[i]) as usize
    }

    pub fn id(&self, s: &[usize]) -> VarId {
        let i = s.len() - self.m;
        let rank = s.iter().fold(0u64, |acc, &a| acc * self.n as u64 + a as u64);
        (self.offsets[i] + rank) as VarId + 1
    }

    pub fn index(&self, id: VarId) -> Option<Vec<usize>> {
        let id = u64::from(id).checked_sub(1)?;
        let i = self.offsets.iter().rposition(|&o| o <= id)?;
        if i + 1 >= self.offsets.len() {
            return None;
        }
        Some(self.unrank(self.m + i, (id - self.offsets[i]) as usize))
    }

    fn unrank(&self, len: usize, mut r: usize) -> Vec<usize> {
        let mut s = vec![0; len];
        for slot in s.iter_mut().rev() {
            *slot = r % self.n;
            r /= self.n;
        }
        s
    }

    /// Assignments of length `m + i` in id order.
    pub fn layer(&self, i: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
        let len = self.m + i;
        (0..self.layer_len(i)).map(move |r| self.unrank(len, r))
    }

    pub fn vars(&self) -> impl Iterator<Item = IndexedPropVar> + '_ {
        (0..=self.depth()).flat_map(move |i| {
            self.layer(i).map(|index| IndexedPropVar {
                id: self.id(&index),
                index,
            })
        })
    }

    pub fn comments(&self) -> Vec<String> {
        let mut out = vec![format!(
            "X_s layers: domain size {}, free tuple length {}",
            self.n, self.m
        )];
        for i in 0..=self.depth() {
            out.push(format!(
                "layer {} (|s| = {}): ids {}..{}",
                i,
                self.m + i,
                self.offset(i),
                self.offset(i) as u64 + self.layer_len(i) as u64 - 1
            ));
        }
        out
    }
}

/// A Boolean formula over the variables `X_s` together with their numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grounding {
    pub formula: QbFormula,
    pub layers: PropVarLayers,
}

impl Grounding {
    pub fn to_dimacs(&self) -> String {
        write_dimacs_with_comments(&self.formula, &self.layers.comments())
    }

    /// The team over the free tuple encoded by a Boolean assignment, where
    /// `assign[v - 1]` is the value of variable `v`.
    pub fn decode_team(&self, assign: &[bool]) -> Vec<Vec<usize>> {
        self.layers
            .layer(0)
            .filter(|s| assign[self.layers.id(s) as usize - 1])
            .collect()
    }
}

struct Builder {
    clauses: Vec<Clause>,
    seen: HashSet<Clause>,
}

impl Builder {
    fn push(&mut self, mut c: Clause) {
        c.sort_by_key(|l| (l.var(), l.is_positive()));
        c.dedup();
        if c.windows(2).any(|w| w[0].var() == w[1].var()) {
            return;
        }
        if self.seen.insert(c.clone()) {
            self.clauses.push(c);
        }
    }
}

fn skeleton(
    a: &Structure,
    d: &NormalFormDescriptor,
    reachability: bool,
) -> Result<(PropVarLayers, Builder, Vec<Vec<usize>>), ReduceError> {
    let n = a.size();
    let depth = d.k() + d.l();
    let layers = PropVarLayers::new(n, d.m(), depth)?;
    let mut b = Builder {
        clauses: Vec::new(),
        seen: HashSet::new(),
    };
    for i in 1..=depth {
        let universal = i <= d.k();
        for s in layers.layer(i - 1) {
            let x = layers.id(&s);
            let children: Vec<VarId> = (0..n)
                .map(|v| {
                    let mut t = s.clone();
                    t.push(v);
                    layers.id(&t)
                })
                .collect();
            if universal {
                for &c in &children {
                    b.push(vec![Lit::neg(x), Lit::pos(c)]);
                }
            } else {
                let mut c = vec![Lit::neg(x)];
                c.extend(children.iter().map(|&c| Lit::pos(c)));
                b.push(c);
            }
        }
        if reachability {
            for t in layers.layer(i) {
                b.push(vec![Lit::neg(layers.id(&t)), Lit::pos(layers.id(&t[..t.len() - 1]))]);
            }
        }
    }
    let leaves: Vec<Vec<usize>> = layers.layer(depth).collect();
    Ok((layers, b, leaves))
}

fn positions(d: &NormalFormDescriptor, vs: &[Var]) -> Vec<usize> {
    let leaf = d.leaf_vars();
    vs.iter()
        .map(|v| leaf.iter().position(|w| w == v).expect("atom variable is a leaf variable"))
        .collect()
}

fn pick(s: &[usize], pos: &[usize]) -> Vec<usize> {
    pos.iter().map(|&p| s[p]).collect()
}

fn bottom_clauses(a: &Structure, d: &NormalFormDescriptor, layers: &PropVarLayers, leaves: &[Vec<usize>], b: &mut Builder) -> Result<(), ReduceError> {
    let Some(theta) = &d.matrix else {
        return Ok(());
    };
    let p = Evaluator::new(a).prepare(&d.leaf_vars(), theta)?;
    for s in leaves {
        if !p.eval_rows([s.as_slice()])? {
            b.push(vec![Lit::neg(layers.id(s))]);
        }
    }
    Ok(())
}

fn finish(layers: PropVarLayers, b: Builder) -> Result<Grounding, ReduceError> {
    let bound: Vec<VarId> = (layers.offset(1)..=layers.num_vars()).collect();
    let formula = QbFormula::new(layers.num_vars(), b.clauses, bound)?;
    Ok(Grounding { formula, layers })
}

/// Grounds a dependence-logic normal form over `a` into a prefix CNF whose
/// free variables `X_s`, `s ∈ A^m`, occur only negatively. Satisfying
/// teams correspond to projected models via `S(X_s) = 1 ⇔ s ∈ X`.
pub fn dep_to_sigma1cnf_neg(a: &Structure, d: &NormalFormDescriptor) -> Result<Grounding, ReduceError> {
    if d.kind != AtomKind::Dependence && !d.atoms.is_empty() {
        return Err(ReduceError::AtomKind("dependence"));
    }
    let (layers, mut b, leaves) = skeleton(a, d, false)?;
    for atom in &d.atoms {
        let NormalAtom::Dep {
            determiners,
            dependent,
        } = atom
        else {
            return Err(ReduceError::AtomKind("dependence"));
        };
        let upos = positions(d, determiners);
        let wpos = positions(d, std::slice::from_ref(dependent))[0];
        let mut groups: BTreeMap<Vec<usize>, Vec<&Vec<usize>>> = BTreeMap::new();
        for s in &leaves {
            groups.entry(pick(s, &upos)).or_default().push(s);
        }
        for group in groups.values() {
            for (i, s) in group.iter().enumerate() {
                for t in &group[i + 1..] {
                    if s[wpos] != t[wpos] {
                        b.push(vec![Lit::neg(layers.id(s)), Lit::neg(layers.id(t))]);
                    }
                }
            }
        }
    }
    bottom_clauses(a, d, &layers, &leaves, &mut b)?;
    finish(layers, b)
}

/// Grounds an inclusion-logic normal form over `a` into a prefix DualHorn
/// formula. Besides the clause families of [`dep_to_sigma1cnf_neg`], every
/// `X_s` with `|s| > m` implies the variable of its parent, so the true
/// variables of each layer form exactly the team generated from the free
/// layer. These clauses put free variables in positive position.
pub fn incl_to_sigma1_dualhorn(a: &Structure, d: &NormalFormDescriptor) -> Result<Grounding, ReduceError> {
    let (layers, mut b, leaves) = skeleton(a, d, true)?;
    for atom in &d.atoms {
        let NormalAtom::Inc { sub, sup } = atom else {
            return Err(ReduceError::AtomKind("inclusion"));
        };
        let xpos = positions(d, sub);
        let ypos = positions(d, sup);
        let mut by_sup: BTreeMap<Vec<usize>, Vec<VarId>> = BTreeMap::new();
        for s in &leaves {
            by_sup.entry(pick(s, &ypos)).or_default().push(layers.id(s));
        }
        for s in &leaves {
            let mut c = vec![Lit::neg(layers.id(s))];
            if let Some(ids) = by_sup.get(&pick(s, &xpos)) {
                c.extend(ids.iter().map(|&v| Lit::pos(v)));
            }
            b.push(c);
        }
    }
    bottom_clauses(a, d, &layers, &leaves, &mut b)?;
    finish(layers, b)
}
