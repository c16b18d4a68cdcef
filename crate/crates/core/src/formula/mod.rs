//! Team-logic formulas in negation normal form.
//!
//! The grammar is first-order logic with negation pushed onto relation atoms
//! and equalities, extended with dependence, independence, inclusion and
//! registered generalized atoms.

mod normal;
mod parse;
mod print;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

pub use normal::{
    check_normal_form, check_normal_form_over, AtomKind, NormalAtom, NormalFormDescriptor,
    NormalFormError,
};
pub use parse::{parse_formula, parse_formula_with, FormulaError, Signature};

/// Names of the arithmetic relations every structure carries implicitly.
pub const BUILTIN_LE: &str = "<=";
pub const BUILTIN_ADD: &str = "+";
pub const BUILTIN_MUL: &str = "*";

pub fn is_builtin(name: &str) -> bool {
    matches!(name, BUILTIN_LE | BUILTIN_ADD | BUILTIN_MUL)
}

/// A first-order variable. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

impl From<String> for Var {
    fn from(s: String) -> Self {
        Var::new(s)
    }
}

/// Builds a variable list from string slices.
pub fn vars<S: AsRef<str>>(names: &[S]) -> Vec<Var> {
    names.iter().map(Var::new).collect()
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    /// `R(x̄)` or `¬R(x̄)`; `R` may be one of the arithmetic built-ins.
    Rel {
        name: String,
        args: Vec<Var>,
        positive: bool,
    },
    /// `x = y` or `x ≠ y`.
    Eq {
        left: Var,
        right: Var,
        positive: bool,
    },
    /// `=(x̄, y)`.
    Dep {
        determiners: Vec<Var>,
        dependent: Var,
    },
    /// `ȳ ⊥_x̄ z̄`.
    Ind {
        left: Vec<Var>,
        given: Vec<Var>,
        right: Vec<Var>,
    },
    /// `x̄ ⊆ ȳ`.
    Inc { sub: Vec<Var>, sup: Vec<Var> },
    /// Reference to a registered generalized atom.
    Gen { name: String, args: Vec<Vec<Var>> },
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

/// Which non-first-order atoms occur in a formula.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct AtomUsage {
    pub dependence: bool,
    pub independence: bool,
    pub inclusion: bool,
    pub generalized: bool,
}

impl AtomUsage {
    pub fn any(&self) -> bool {
        self.dependence || self.independence || self.inclusion || self.generalized
    }

    fn merge(self, other: AtomUsage) -> AtomUsage {
        AtomUsage {
            dependence: self.dependence || other.dependence,
            independence: self.independence || other.independence,
            inclusion: self.inclusion || other.inclusion,
            generalized: self.generalized || other.generalized,
        }
    }
}

impl Formula {
    pub fn rel(name: impl Into<String>, args: Vec<Var>) -> Formula {
        Formula::Rel {
            name: name.into(),
            args,
            positive: true,
        }
    }

    pub fn not_rel(name: impl Into<String>, args: Vec<Var>) -> Formula {
        Formula::Rel {
            name: name.into(),
            args,
            positive: false,
        }
    }

    pub fn eq(left: impl Into<Var>, right: impl Into<Var>) -> Formula {
        Formula::Eq {
            left: left.into(),
            right: right.into(),
            positive: true,
        }
    }

    pub fn neq(left: impl Into<Var>, right: impl Into<Var>) -> Formula {
        Formula::Eq {
            left: left.into(),
            right: right.into(),
            positive: false,
        }
    }

    pub fn dep(determiners: Vec<Var>, dependent: impl Into<Var>) -> Formula {
        Formula::Dep {
            determiners,
            dependent: dependent.into(),
        }
    }

    pub fn inc(sub: Vec<Var>, sup: Vec<Var>) -> Formula {
        Formula::Inc { sub, sup }
    }

    pub fn ind(left: Vec<Var>, given: Vec<Var>, right: Vec<Var>) -> Formula {
        Formula::Ind { left, given, right }
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn exists(v: impl Into<Var>, body: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn forall(v: impl Into<Var>, body: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(body))
    }

    /// Left-nested conjunction; `None` for an empty iterator.
    pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    /// Left-nested disjunction; `None` for an empty iterator.
    pub fn or_all(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::or)
    }

    pub fn exists_all(vars: &[Var], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    pub fn forall_all(vars: &[Var], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::forall(v.clone(), acc))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut note = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::Rel { args, .. } => args.iter().for_each(|v| note(v, bound)),
            Formula::Eq { left, right, .. } => {
                note(left, bound);
                note(right, bound);
            }
            Formula::Dep {
                determiners,
                dependent,
            } => {
                determiners.iter().for_each(|v| note(v, bound));
                note(dependent, bound);
            }
            Formula::Ind { left, given, right } => left
                .iter()
                .chain(given)
                .chain(right)
                .for_each(|v| note(v, bound)),
            Formula::Inc { sub, sup } => sub.iter().chain(sup).for_each(|v| note(v, bound)),
            Formula::Gen { args, .. } => args.iter().flatten().for_each(|v| note(v, bound)),
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn atom_usage(&self) -> AtomUsage {
        match self {
            Formula::Rel { .. } | Formula::Eq { .. } => AtomUsage::default(),
            Formula::Dep { .. } => AtomUsage {
                dependence: true,
                ..Default::default()
            },
            Formula::Ind { .. } => AtomUsage {
                independence: true,
                ..Default::default()
            },
            Formula::Inc { .. } => AtomUsage {
                inclusion: true,
                ..Default::default()
            },
            Formula::Gen { .. } => AtomUsage {
                generalized: true,
                ..Default::default()
            },
            Formula::And(l, r) | Formula::Or(l, r) => l.atom_usage().merge(r.atom_usage()),
            Formula::Exists(_, b) | Formula::Forall(_, b) => b.atom_usage(),
        }
    }

    /// No dependency atoms of any kind: the formula is flat.
    pub fn is_first_order(&self) -> bool {
        !self.atom_usage().any()
    }

    /// Formula of FO(=(…)): satisfaction is closed under subteams.
    pub fn is_downward_closed(&self) -> bool {
        let u = self.atom_usage();
        !(u.independence || u.inclusion || u.generalized)
    }

    /// Formula of FO(⊆): satisfaction is closed under unions.
    pub fn is_union_closed(&self) -> bool {
        let u = self.atom_usage();
        !(u.dependence || u.independence || u.generalized)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.is_quantifier_free() && r.is_quantifier_free()
            }
            Formula::Exists(..) | Formula::Forall(..) => false,
            _ => true,
        }
    }

    /// Relation symbols used, with the arity of each occurrence.
    pub fn relation_symbols(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Rel { name, args, .. } = f {
                if !out.iter().any(|(n, a)| n == name && *a == args.len()) {
                    out.push((name.clone(), args.len()));
                }
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Formula::Exists(_, b) | Formula::Forall(_, b) => b.visit(f),
            _ => {}
        }
    }

    /// Negation in negation normal form. Only defined for first-order formulas.
    pub fn negate(&self) -> Option<Formula> {
        Some(match self {
            Formula::Rel {
                name,
                args,
                positive,
            } => Formula::Rel {
                name: name.clone(),
                args: args.clone(),
                positive: !positive,
            },
            Formula::Eq {
                left,
                right,
                positive,
            } => Formula::Eq {
                left: left.clone(),
                right: right.clone(),
                positive: !positive,
            },
            Formula::And(l, r) => Formula::or(l.negate()?, r.negate()?),
            Formula::Or(l, r) => Formula::and(l.negate()?, r.negate()?),
            Formula::Exists(v, b) => Formula::forall(v.clone(), b.negate()?),
            Formula::Forall(v, b) => Formula::exists(v.clone(), b.negate()?),
            _ => return None,
        })
    }

    /// Replaces free occurrences of variables according to `map`.
    ///
    /// The caller must ensure no replacement variable is captured by a
    /// quantifier of `self`; see [`Formula::freshen_bound`].
    pub fn substitute(&self, map: &HashMap<Var, Var>) -> Formula {
        let sub = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
        let sub_all = |vs: &[Var]| vs.iter().map(sub).collect::<Vec<_>>();
        match self {
            Formula::Rel {
                name,
                args,
                positive,
            } => Formula::Rel {
                name: name.clone(),
                args: sub_all(args),
                positive: *positive,
            },
            Formula::Eq {
                left,
                right,
                positive,
            } => Formula::Eq {
                left: sub(left),
                right: sub(right),
                positive: *positive,
            },
            Formula::Dep {
                determiners,
                dependent,
            } => Formula::Dep {
                determiners: sub_all(determiners),
                dependent: sub(dependent),
            },
            Formula::Ind { left, given, right } => Formula::Ind {
                left: sub_all(left),
                given: sub_all(given),
                right: sub_all(right),
            },
            Formula::Inc { sub: s, sup } => Formula::Inc {
                sub: sub_all(s),
                sup: sub_all(sup),
            },
            Formula::Gen { name, args } => Formula::Gen {
                name: name.clone(),
                args: args.iter().map(|t| sub_all(t)).collect(),
            },
            Formula::And(l, r) => Formula::and(l.substitute(map), r.substitute(map)),
            Formula::Or(l, r) => Formula::or(l.substitute(map), r.substitute(map)),
            Formula::Exists(v, b) | Formula::Forall(v, b) => {
                let body = if map.contains_key(v) {
                    let mut inner = map.clone();
                    inner.remove(v);
                    b.substitute(&inner)
                } else {
                    b.substitute(map)
                };
                match self {
                    Formula::Exists(..) => Formula::exists(v.clone(), body),
                    _ => Formula::forall(v.clone(), body),
                }
            }
        }
    }

    /// Renames every bound variable to a fresh name drawn from `fresh`.
    pub fn freshen_bound(&self, fresh: &mut FreshVars) -> Formula {
        match self {
            Formula::And(l, r) => Formula::and(l.freshen_bound(fresh), r.freshen_bound(fresh)),
            Formula::Or(l, r) => Formula::or(l.freshen_bound(fresh), r.freshen_bound(fresh)),
            Formula::Exists(v, b) | Formula::Forall(v, b) => {
                let new = fresh.next();
                let map = HashMap::from([(v.clone(), new.clone())]);
                let body = b.substitute(&map).freshen_bound(fresh);
                match self {
                    Formula::Exists(..) => Formula::exists(new, body),
                    _ => Formula::forall(new, body),
                }
            }
            atom => atom.clone(),
        }
    }
}

/// Generator of variable names `<prefix><n>`.
#[derive(Debug, Clone)]
pub struct FreshVars {
    prefix: String,
    next: usize,
}

impl FreshVars {
    pub fn new(prefix: impl Into<String>) -> Self {
        FreshVars {
            prefix: prefix.into(),
            next: 0,
        }
    }

    pub fn next(&mut self) -> Var {
        self.next += 1;
        Var::new(format!("{}{}", self.prefix, self.next))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_respect_binding() {
        let f = parse_formula("A x. E y. (inc(x;y) & R(x,z))").unwrap();
        assert_eq!(f.free_vars(), BTreeSet::from([Var::new("z")]));
    }

    #[test]
    fn fragment_classification() {
        let dep = parse_formula("dep(x;y) | R(x)").unwrap();
        assert!(dep.is_downward_closed() && !dep.is_union_closed());
        let inc = parse_formula("E y. inc(x;y)").unwrap();
        assert!(inc.is_union_closed() && !inc.is_downward_closed());
        let fo = parse_formula("A y. (R(x,y) | x!=y)").unwrap();
        assert!(fo.is_first_order() && fo.is_union_closed() && fo.is_downward_closed());
    }

    #[test]
    fn negation_is_nnf_dual() {
        let f = parse_formula("A y. (R(x,y) | x!=y)").unwrap();
        let g = f.negate().unwrap();
        assert_eq!(g.to_string(), "E y. (!R(x,y) & x=y)");
        assert!(parse_formula("dep(x;y)").unwrap().negate().is_none());
    }

    #[test]
    fn substitution_stops_at_binder() {
        let f = parse_formula("(R(x) & E x. S(x,y))").unwrap();
        let map = HashMap::from([(Var::new("x"), Var::new("u")), (Var::new("y"), Var::new("v"))]);
        assert_eq!(f.substitute(&map).to_string(), "(R(u) & E x. S(x,v))");
    }

    #[test]
    fn freshening_renames_binders_only() {
        let f = parse_formula("E x. A y. R(x,y,z)").unwrap();
        let g = f.freshen_bound(&mut FreshVars::new("_b"));
        assert_eq!(g.to_string(), "E _b1. A _b2. R(_b1,_b2,z)");
    }
}
