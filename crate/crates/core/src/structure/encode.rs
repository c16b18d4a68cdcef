use std::collections::BTreeSet;

use super::{Structure, StructureError};
use crate::cnf::{Lit, QbFormula, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Var(VarId),
    /// Index into the formula's clause list.
    Clause(usize),
}

/// A structure encoding a CNF, with the meaning of each domain element.
#[derive(Debug, Clone)]
pub struct FormulaEncoding {
    pub structure: Structure,
    pub elements: Vec<ElementKind>,
}

impl FormulaEncoding {
    pub fn element_of_var(&self, v: VarId) -> Option<usize> {
        self.elements.iter().position(|&e| e == ElementKind::Var(v))
    }

    pub fn element_of_clause(&self, c: usize) -> Option<usize> {
        self.elements.iter().position(|&e| e == ElementKind::Clause(c))
    }
}

/// Truth table of every declared relation, row by row in vocabulary order.
pub fn encode_structure(a: &Structure) -> String {
    let mut out = String::new();
    for (_, r) in a.relations() {
        out.extend((0..r.table_len()).map(|i| if r.contains_rank(i) { '1' } else { '0' }));
    }
    out
}

// Variables by first occurrence, then the unused ones in increasing order.
fn variable_order(f: &QbFormula) -> Vec<VarId> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for l in f.clauses().iter().flatten() {
        if seen.insert(l.var()) {
            order.push(l.var());
        }
    }
    order.extend((1..=f.num_vars()).filter(|v| !seen.contains(v)));
    order
}

fn layout(f: &QbFormula, with_clauses: bool) -> (Vec<ElementKind>, Vec<usize>) {
    let mut elements: Vec<ElementKind> = variable_order(f).into_iter().map(ElementKind::Var).collect();
    let mut pos = vec![usize::MAX; f.num_vars() as usize + 1];
    for (i, e) in elements.iter().enumerate() {
        if let ElementKind::Var(v) = e {
            pos[*v as usize] = i;
        }
    }
    if with_clauses {
        elements.extend((0..f.clauses().len()).map(ElementKind::Clause));
    }
    (elements, pos)
}

/// Encodes a quantifier-free positive CNF with at most two literals per
/// clause as the relation `C`; a unit clause `x` becomes `C(x,x)`.
pub fn encode_2cnf_plus(f: &QbFormula) -> Result<FormulaEncoding, StructureError> {
    let flags = f.classify();
    if !f.bound().is_empty() || !flags.is_kcnf(2) || f.clauses().iter().flatten().any(|l| !l.is_positive()) {
        return Err(StructureError::Class("a quantifier-free 2CNF+ formula"));
    }
    let (elements, pos) = layout(f, false);
    let mut a = Structure::new(elements.len())?;
    a.add_relation("C", 2)?;
    for c in f.clauses() {
        let x = pos[c[0].var() as usize];
        let y = c.get(1).map_or(x, |l| pos[l.var() as usize]);
        a.insert("C", &[x, y])?;
    }
    Ok(FormulaEncoding {
        structure: a,
        elements,
    })
}

fn incidence(a: &mut Structure, f: &QbFormula, pos: &[usize]) -> Result<(), StructureError> {
    let base = f.num_vars() as usize;
    for (i, c) in f.clauses().iter().enumerate() {
        for l in c {
            let rel = if l.is_positive() { "P" } else { "N" };
            a.insert(rel, &[base + i, pos[l.var() as usize]])?;
        }
    }
    Ok(())
}

/// Encodes a prefix CNF whose free variables occur only negatively over the
/// vocabulary `F/1, B/1, P/2, N/2`.
pub fn encode_sigma1cnf_neg(f: &QbFormula) -> Result<FormulaEncoding, StructureError> {
    if !f.classify().cnf_neg {
        return Err(StructureError::Class("Σ1CNF-: a free variable occurs positively"));
    }
    let (elements, pos) = layout(f, true);
    let mut a = Structure::new(elements.len())?;
    for (name, arity) in [("F", 1), ("B", 1), ("P", 2), ("N", 2)] {
        a.add_relation(name, arity)?;
    }
    for v in 1..=f.num_vars() {
        let rel = if f.is_bound(v) { "B" } else { "F" };
        a.insert(rel, &[pos[v as usize]])?;
    }
    incidence(&mut a, f, &pos)?;
    Ok(FormulaEncoding {
        structure: a,
        elements,
    })
}

/// Encodes a quantifier-free DualHorn CNF over the vocabulary `C/1, P/2, N/2`.
pub fn encode_dualhorn(f: &QbFormula) -> Result<FormulaEncoding, StructureError> {
    if !f.bound().is_empty() || !f.classify().dual_horn {
        return Err(StructureError::Class("a quantifier-free DualHorn formula"));
    }
    let (elements, pos) = layout(f, true);
    let mut a = Structure::new(elements.len())?;
    for (name, arity) in [("C", 1), ("P", 2), ("N", 2)] {
        a.add_relation(name, arity)?;
    }
    let base = f.num_vars() as usize;
    for i in 0..f.clauses().len() {
        a.insert("C", &[base + i])?;
    }
    incidence(&mut a, f, &pos)?;
    Ok(FormulaEncoding {
        structure: a,
        elements,
    })
}

fn check_sigma1_vocabulary(a: &Structure) -> Result<(), StructureError> {
    let mut voc = a.vocabulary();
    voc.sort();
    let want: Vec<(String, usize)> = [("B", 1), ("F", 1), ("N", 2), ("P", 2)]
        .iter()
        .map(|&(n, k)| (n.to_string(), k))
        .collect();
    if voc != want {
        return Err(StructureError::Vocabulary(format!(
            "expected F/1, B/1, P/2, N/2, found {voc:?}"
        )));
    }
    Ok(())
}

/// Whether `a` is a well-formed encoding of a prefix CNF with free
/// variables occurring only negatively.
pub fn validate_sigma1cnf_neg_structure(a: &Structure) -> Result<bool, StructureError> {
    check_sigma1_vocabulary(a)?;
    let f = a.relation("F").expect("checked");
    let b = a.relation("B").expect("checked");
    let is_var = |x: usize| f.contains(&[x]) || b.contains(&[x]);
    if (0..a.size()).any(|x| f.contains(&[x]) && b.contains(&[x])) {
        return Ok(false);
    }
    for rel in ["P", "N"] {
        for t in a.relation(rel).expect("checked").tuples() {
            if is_var(t[0]) || !is_var(t[1]) {
                return Ok(false);
            }
            if rel == "P" && f.contains(&[t[1]]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Reads back a formula from a valid `F, B, P, N` structure. Variable
/// elements are numbered `1..` in element order; every other element is a
/// clause.
pub fn decode_sigma1cnf_neg(a: &Structure) -> Result<(QbFormula, Vec<ElementKind>), StructureError> {
    if !validate_sigma1cnf_neg_structure(a)? {
        return Err(StructureError::Class("a valid Σ1CNF- encoding"));
    }
    let f = a.relation("F").expect("checked");
    let b = a.relation("B").expect("checked");
    let p = a.relation("P").expect("checked");
    let n = a.relation("N").expect("checked");
    let mut ids = vec![0 as VarId; a.size()];
    let mut bound = Vec::new();
    let mut next = 0;
    for x in 0..a.size() {
        if f.contains(&[x]) || b.contains(&[x]) {
            next += 1;
            ids[x] = next;
            if b.contains(&[x]) {
                bound.push(next);
            }
        }
    }
    let mut clauses = Vec::new();
    for c in 0..a.size() {
        if ids[c] != 0 {
            continue;
        }
        let mut clause = Vec::new();
        for x in (0..a.size()).filter(|&x| ids[x] != 0) {
            if p.contains(&[c, x]) {
                clause.push(Lit::pos(ids[x]));
            }
            if n.contains(&[c, x]) {
                clause.push(Lit::neg(ids[x]));
            }
        }
        clauses.push(clause);
    }
    let mut ci = 0;
    let ordered = (0..a.size())
        .map(|x| {
            if ids[x] != 0 {
                ElementKind::Var(ids[x])
            } else {
                ci += 1;
                ElementKind::Clause(ci - 1)
            }
        })
        .collect();
    let qb = QbFormula::new(next, clauses, bound).map_err(|_| StructureError::Class("decodable"))?;
    Ok((qb, ordered))
}
