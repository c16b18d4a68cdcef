use std::collections::HashMap;
use std::sync::Arc;

use super::{AtomRegistry, EvalError, GeneralizedAtomDef};
use crate::formula::{is_builtin, Formula, Var};
use crate::structure::Structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RelRef {
    Declared(usize),
    Builtin,
}

pub(crate) enum NodeKind {
    Rel {
        name: String,
        rel: RelRef,
        args: Vec<usize>,
        positive: bool,
    },
    Eq {
        l: usize,
        r: usize,
        positive: bool,
    },
    Dep {
        det: Vec<usize>,
        dep: usize,
    },
    Ind {
        left: Vec<usize>,
        given: Vec<usize>,
        right: Vec<usize>,
    },
    Inc {
        sub: Vec<usize>,
        sup: Vec<usize>,
    },
    Gen {
        atom: Arc<GeneralizedAtomDef>,
        args: Vec<Vec<usize>>,
    },
    And(usize, usize),
    Or(usize, usize),
    Exists(usize, usize),
    Forall(usize, usize),
}

pub(crate) struct Node {
    pub kind: NodeKind,
    /// No dependency or generalized atoms below.
    pub fo: bool,
    /// Only dependence atoms besides first-order parts.
    pub downward: bool,
    /// Only inclusion atoms besides first-order parts.
    pub union: bool,
    pub has_gen: bool,
}

/// A formula resolved against a structure, with every variable mapped to a
/// column of a fixed-width row. Team variables occupy the first columns.
pub(crate) struct Compiled {
    pub nodes: Vec<Node>,
    pub root: usize,
    pub width: usize,
    pub team_width: usize,
}

struct Builder<'a> {
    a: &'a Structure,
    registry: Option<&'a AtomRegistry>,
    slots: HashMap<Var, usize>,
    nodes: Vec<Node>,
}

pub(crate) fn compile(
    a: &Structure,
    registry: Option<&AtomRegistry>,
    team_vars: &[Var],
    f: &Formula,
) -> Result<Compiled, EvalError> {
    let mut slots = HashMap::new();
    for (i, v) in team_vars.iter().enumerate() {
        slots.insert(v.clone(), i);
    }
    for v in f.free_vars() {
        if !slots.contains_key(&v) {
            return Err(EvalError::UnboundVariable(v.to_string()));
        }
    }
    let mut b = Builder {
        a,
        registry,
        slots,
        nodes: Vec::new(),
    };
    let root = b.build(f)?;
    Ok(Compiled {
        width: b.slots.len(),
        team_width: team_vars.len(),
        nodes: b.nodes,
        root,
    })
}

impl Builder<'_> {
    fn slot(&self, v: &Var) -> Result<usize, EvalError> {
        self.slots
            .get(v)
            .copied()
            .ok_or_else(|| EvalError::UnboundVariable(v.to_string()))
    }

    fn slots_of(&self, vs: &[Var]) -> Result<Vec<usize>, EvalError> {
        vs.iter().map(|v| self.slot(v)).collect()
    }

    fn bind(&mut self, v: &Var) -> usize {
        let next = self.slots.len();
        *self.slots.entry(v.clone()).or_insert(next)
    }

    fn push(&mut self, kind: NodeKind) -> usize {
        let (fo, downward, union, has_gen) = match &kind {
            NodeKind::Rel { .. } | NodeKind::Eq { .. } => (true, true, true, false),
            NodeKind::Dep { .. } => (false, true, false, false),
            NodeKind::Inc { .. } => (false, false, true, false),
            NodeKind::Ind { .. } => (false, false, false, false),
            NodeKind::Gen { .. } => (false, false, false, true),
            NodeKind::And(l, r) | NodeKind::Or(l, r) => {
                let (l, r) = (&self.nodes[*l], &self.nodes[*r]);
                (
                    l.fo && r.fo,
                    l.downward && r.downward,
                    l.union && r.union,
                    l.has_gen || r.has_gen,
                )
            }
            NodeKind::Exists(_, b) | NodeKind::Forall(_, b) => {
                let b = &self.nodes[*b];
                (b.fo, b.downward, b.union, b.has_gen)
            }
        };
        self.nodes.push(Node {
            kind,
            fo,
            downward,
            union,
            has_gen,
        });
        self.nodes.len() - 1
    }

    fn build(&mut self, f: &Formula) -> Result<usize, EvalError> {
        let kind = match f {
            Formula::Rel {
                name,
                args,
                positive,
            } => {
                let rel = if is_builtin(name) {
                    let probe = vec![0; args.len()];
                    if self.a.builtin(name, &probe).is_none() {
                        return Err(EvalError::Arity {
                            name: name.clone(),
                            found: args.len(),
                        });
                    }
                    RelRef::Builtin
                } else {
                    let i = self
                        .a
                        .relation_index(name)
                        .map_err(|_| EvalError::UnknownRelation(name.clone()))?;
                    if self.a.relation_at(i).arity() != args.len() {
                        return Err(EvalError::Arity {
                            name: name.clone(),
                            found: args.len(),
                        });
                    }
                    RelRef::Declared(i)
                };
                NodeKind::Rel {
                    name: name.clone(),
                    rel,
                    args: self.slots_of(args)?,
                    positive: *positive,
                }
            }
            Formula::Eq {
                left,
                right,
                positive,
            } => NodeKind::Eq {
                l: self.slot(left)?,
                r: self.slot(right)?,
                positive: *positive,
            },
            Formula::Dep {
                determiners,
                dependent,
            } => NodeKind::Dep {
                det: self.slots_of(determiners)?,
                dep: self.slot(dependent)?,
            },
            Formula::Ind { left, given, right } => NodeKind::Ind {
                left: self.slots_of(left)?,
                given: self.slots_of(given)?,
                right: self.slots_of(right)?,
            },
            Formula::Inc { sub, sup } => NodeKind::Inc {
                sub: self.slots_of(sub)?,
                sup: self.slots_of(sup)?,
            },
            Formula::Gen { name, args } => {
                let atom = self
                    .registry
                    .and_then(|r| r.get(name))
                    .ok_or_else(|| EvalError::UnknownAtom(name.clone()))?;
                let found: Vec<usize> = args.iter().map(Vec::len).collect();
                if found != atom.arities {
                    return Err(EvalError::AtomType {
                        name: name.clone(),
                        expected: atom.arities.clone(),
                        found,
                    });
                }
                NodeKind::Gen {
                    atom,
                    args: args
                        .iter()
                        .map(|t| self.slots_of(t))
                        .collect::<Result<_, _>>()?,
                }
            }
            Formula::And(l, r) => {
                let l = self.build(l)?;
                let r = self.build(r)?;
                NodeKind::And(l, r)
            }
            Formula::Or(l, r) => {
                let l = self.build(l)?;
                let r = self.build(r)?;
                NodeKind::Or(l, r)
            }
            Formula::Exists(v, b) | Formula::Forall(v, b) => {
                // A rebound variable reuses its column: s[a/v] overwrites.
                let s = self.bind(v);
                let body = self.build(b)?;
                if matches!(f, Formula::Exists(..)) {
                    NodeKind::Exists(s, body)
                } else {
                    NodeKind::Forall(s, body)
                }
            }
        };
        Ok(self.push(kind))
    }
}
