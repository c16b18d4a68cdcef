use std::collections::BTreeSet;

use thiserror::Error;

use super::{Formula, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomKind {
    Dependence,
    Inclusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NormalAtom {
    Dep { determiners: Vec<Var>, dependent: Var },
    Inc { sub: Vec<Var>, sup: Vec<Var> },
}

impl NormalAtom {
    pub fn to_formula(&self) -> Formula {
        match self {
            NormalAtom::Dep {
                determiners,
                dependent,
            } => Formula::dep(determiners.clone(), dependent.clone()),
            NormalAtom::Inc { sub, sup } => Formula::inc(sub.clone(), sup.clone()),
        }
    }
}

/// A formula of the shape `A y1..yk. E z1..zl. (atoms & matrix)` with a
/// quantifier-free first-order matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormDescriptor {
    pub kind: AtomKind,
    pub free: Vec<Var>,
    pub universal: Vec<Var>,
    pub existential: Vec<Var>,
    pub atoms: Vec<NormalAtom>,
    /// `None` stands for the empty conjunction.
    pub matrix: Option<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalFormError {
    #[error("not in normal form: {reason} in `{node}`")]
    Violation { reason: String, node: Formula },
    #[error("invalid free-variable tuple: {0}")]
    FreeTuple(String),
}

fn violation(reason: impl Into<String>, node: &Formula) -> NormalFormError {
    NormalFormError::Violation {
        reason: reason.into(),
        node: node.clone(),
    }
}

impl NormalFormDescriptor {
    pub fn m(&self) -> usize {
        self.free.len()
    }

    pub fn k(&self) -> usize {
        self.universal.len()
    }

    pub fn l(&self) -> usize {
        self.existential.len()
    }

    /// All variables in leaf order: free tuple, then universal, then existential.
    pub fn leaf_vars(&self) -> Vec<Var> {
        let mut out = self.free.clone();
        out.extend(self.universal.iter().cloned());
        out.extend(self.existential.iter().cloned());
        out
    }

    /// Builds the formula this descriptor describes. An empty body is
    /// rendered as the tautology `v=v` on some variable in scope.
    pub fn to_formula(&self) -> Formula {
        let mut parts: Vec<Formula> = Vec::new();
        if let Some(a) = Formula::and_all(self.atoms.iter().map(NormalAtom::to_formula)) {
            parts.push(a);
        }
        if let Some(m) = &self.matrix {
            parts.push(m.clone());
        }
        let body = Formula::and_all(parts).unwrap_or_else(|| {
            let v = self
                .leaf_vars()
                .into_iter()
                .next()
                .unwrap_or_else(|| Var::new("v"));
            Formula::eq(v.clone(), v)
        });
        Formula::forall_all(&self.universal, Formula::exists_all(&self.existential, body))
    }
}

/// Recognizes the normal form with the free tuple fixed to the sorted free
/// variables of `f`.
pub fn check_normal_form(
    f: &Formula,
    kind: AtomKind,
) -> Result<NormalFormDescriptor, NormalFormError> {
    let free: Vec<Var> = f.free_vars().into_iter().collect();
    check_normal_form_over(f, kind, &free)
}

/// Recognizes the normal form relative to an explicit free tuple, which must
/// cover the free variables of `f` and be disjoint from its bound variables.
pub fn check_normal_form_over(
    f: &Formula,
    kind: AtomKind,
    free: &[Var],
) -> Result<NormalFormDescriptor, NormalFormError> {
    let free_set: BTreeSet<&Var> = free.iter().collect();
    if free_set.len() != free.len() {
        return Err(NormalFormError::FreeTuple("repeated variable".into()));
    }
    for v in f.free_vars() {
        if !free_set.contains(&v) {
            return Err(NormalFormError::FreeTuple(format!(
                "free variable `{v}` missing from the tuple"
            )));
        }
    }

    let mut universal = Vec::new();
    let mut existential = Vec::new();
    let mut node = f;
    let mut seen: BTreeSet<Var> = BTreeSet::new();
    loop {
        match node {
            Formula::Forall(v, b) => {
                if !existential.is_empty() {
                    return Err(violation("universal quantifier after existential", node));
                }
                if free_set.contains(v) || !seen.insert(v.clone()) {
                    return Err(violation(format!("variable `{v}` bound twice"), node));
                }
                universal.push(v.clone());
                node = b;
            }
            Formula::Exists(v, b) => {
                if free_set.contains(v) || !seen.insert(v.clone()) {
                    return Err(violation(format!("variable `{v}` bound twice"), node));
                }
                existential.push(v.clone());
                node = b;
            }
            _ => break,
        }
    }

    let mut atoms = Vec::new();
    let mut fo_parts = Vec::new();
    split_conjunction(node, kind, &mut atoms, &mut fo_parts)?;

    let uni: BTreeSet<&Var> = universal.iter().collect();
    let exi: BTreeSet<&Var> = existential.iter().collect();
    for a in &atoms {
        if let NormalAtom::Dep {
            determiners,
            dependent,
        } = a
        {
            let node = a.to_formula();
            if determiners.is_empty() {
                return Err(violation("constancy atom", &node));
            }
            if !exi.contains(dependent) {
                return Err(violation(
                    format!("dependent variable `{dependent}` is not existentially quantified"),
                    &node,
                ));
            }
            if let Some(u) = determiners.iter().find(|u| !uni.contains(u)) {
                return Err(violation(
                    format!("determiner `{u}` is not universally quantified"),
                    &node,
                ));
            }
        }
    }

    Ok(NormalFormDescriptor {
        kind,
        free: free.to_vec(),
        universal,
        existential,
        atoms,
        matrix: Formula::and_all(fo_parts),
    })
}

fn has_dependency_atom(f: &Formula) -> bool {
    f.atom_usage().any()
}

// Conjunction subtrees free of dependency atoms are kept whole so that the
// matrix survives a round trip through `to_formula` unchanged.
fn split_conjunction(
    f: &Formula,
    kind: AtomKind,
    atoms: &mut Vec<NormalAtom>,
    fo: &mut Vec<Formula>,
) -> Result<(), NormalFormError> {
    match f {
        Formula::And(l, r) if has_dependency_atom(f) => {
            split_conjunction(l, kind, atoms, fo)?;
            split_conjunction(r, kind, atoms, fo)
        }
        Formula::Dep {
            determiners,
            dependent,
        } if kind == AtomKind::Dependence => {
            atoms.push(NormalAtom::Dep {
                determiners: determiners.clone(),
                dependent: dependent.clone(),
            });
            Ok(())
        }
        Formula::Inc { sub, sup } if kind == AtomKind::Inclusion => {
            atoms.push(NormalAtom::Inc {
                sub: sub.clone(),
                sup: sup.clone(),
            });
            Ok(())
        }
        Formula::Dep { .. } | Formula::Inc { .. } | Formula::Ind { .. } | Formula::Gen { .. } => {
            Err(violation("atom of the wrong kind", f))
        }
        _ if has_dependency_atom(f) => Err(violation("dependency atom below a connective", f)),
        _ if !f.is_quantifier_free() => Err(violation("quantifier inside the matrix", f)),
        _ => {
            fo.push(f.clone());
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn dependence_shape() {
        let f = parse_formula("A y1. E y2. (dep(y1;y2) & R(y2))").unwrap();
        let d = check_normal_form(&f, AtomKind::Dependence).unwrap();
        assert_eq!((d.m(), d.k(), d.l()), (0, 1, 1));
        assert_eq!(d.atoms.len(), 1);
        assert_eq!(d.matrix, Some(parse_formula("R(y2)").unwrap()));
        assert_eq!(d.to_formula(), f);
    }

    #[test]
    fn disjunction_above_atom_is_rejected() {
        let f = parse_formula("dep(x;y) | R(x)").unwrap();
        let err = check_normal_form(&f, AtomKind::Dependence).unwrap_err();
        assert!(matches!(err, NormalFormError::Violation { node, .. } if node == f));
    }

    #[test]
    fn quantifier_free_matrix_only() {
        let f = parse_formula("R(x) & x!=y").unwrap();
        let d = check_normal_form(&f, AtomKind::Dependence).unwrap();
        assert_eq!((d.m(), d.k(), d.l(), d.atoms.len()), (2, 0, 0, 0));
        assert_eq!(d.to_formula(), f);
    }

    #[test]
    fn dependence_restrictions() {
        for bad in [
            "E y. dep(;y)",
            "A x. A y. dep(x;y)",
            "E z. A x. E y. dep(x;y)",
            "A x. E y. (dep(x;y) & E z. R(z))",
            "A x. E y. (dep(x;y) & inc(x;y))",
            "A x. E y. (dep(x,z;y) & R(z))",
        ] {
            let f = parse_formula(bad).unwrap();
            assert!(check_normal_form(&f, AtomKind::Dependence).is_err(), "{bad}");
        }
    }

    #[test]
    fn inclusion_shape_and_explicit_tuple() {
        let f = parse_formula("A y. E z. (inc(x;z) & (y=z | R(x)))").unwrap();
        let free = crate::formula::vars(&["x", "w"]);
        let d = check_normal_form_over(&f, AtomKind::Inclusion, &free).unwrap();
        assert_eq!(d.leaf_vars(), crate::formula::vars(&["x", "w", "y", "z"]));
        assert_eq!(d.to_formula(), f);
        assert!(check_normal_form_over(&f, AtomKind::Inclusion, &[]).is_err());
    }

    #[test]
    fn empty_body_renders_as_tautology() {
        let d = NormalFormDescriptor {
            kind: AtomKind::Inclusion,
            free: crate::formula::vars(&["x"]),
            universal: vec![],
            existential: vec![],
            atoms: vec![],
            matrix: None,
        };
        assert_eq!(d.to_formula().to_string(), "x=x");
    }
}
