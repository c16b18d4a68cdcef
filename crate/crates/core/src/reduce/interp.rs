use std::collections::{BTreeSet, HashMap};

use super::ReduceError;
use crate::eval::Evaluator;
use crate::formula::{is_builtin, Formula, FreshVars, Var};
use crate::structure::{Numerals, Structure, Team};

/// A formula together with the ordered variables it is read over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub params: Vec<Var>,
    pub body: Formula,
}

impl Definition {
    pub fn new(params: Vec<Var>, body: Formula) -> Self {
        Definition { params, body }
    }

    /// The body with its parameters replaced by `args`; bound variables are
    /// renamed first so nothing in `args` gets captured.
    fn instantiate(&self, args: &[Var], fresh: &mut FreshVars) -> Formula {
        let map: HashMap<Var, Var> = self.params.iter().cloned().zip(args.iter().cloned()).collect();
        self.body.freshen_bound(fresh).substitute(&map)
    }
}

/// A first-order interpretation of width `k`: target elements are the
/// `k`-tuples satisfying `domain`, and each target relation of arity `a` is
/// defined by a formula over `k·a` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoInterpretation {
    width: usize,
    source: Vec<(String, usize)>,
    domain: Definition,
    relations: Vec<(String, usize, Definition)>,
}

impl FoInterpretation {
    pub fn new(
        width: usize,
        source: Vec<(String, usize)>,
        domain: Definition,
        relations: Vec<(String, usize, Definition)>,
    ) -> Result<Self, ReduceError> {
        if width == 0 {
            return Err(ReduceError::Interpretation("width must be positive".into()));
        }
        let check = |what: &str, d: &Definition, expected: usize| -> Result<(), ReduceError> {
            let bad = |msg: String| Err(ReduceError::Interpretation(format!("{what}: {msg}")));
            if d.params.len() != expected {
                return bad(format!("expected {expected} parameters, found {}", d.params.len()));
            }
            let distinct: BTreeSet<&Var> = d.params.iter().collect();
            if distinct.len() != d.params.len() {
                return bad("repeated parameter".into());
            }
            if !d.body.is_first_order() {
                return bad("definition is not first-order".into());
            }
            if let Some(v) = d.body.free_vars().into_iter().find(|v| !d.params.contains(v)) {
                return bad(format!("free variable `{v}` is not a parameter"));
            }
            for (name, arity) in d.body.relation_symbols() {
                if !is_builtin(&name) && !source.contains(&(name.clone(), arity)) {
                    return bad(format!("`{name}/{arity}` is not in the source vocabulary"));
                }
            }
            Ok(())
        };
        check("domain", &domain, width)?;
        let mut names = BTreeSet::new();
        for (name, arity, d) in &relations {
            if is_builtin(name) || !names.insert(name) {
                return Err(ReduceError::Interpretation(format!("bad target relation `{name}`")));
            }
            check(name, d, width * arity)?;
        }
        Ok(FoInterpretation {
            width,
            source,
            domain,
            relations,
        })
    }

    /// The width-1 interpretation that maps every structure over `vocabulary`
    /// to itself.
    pub fn identity(vocabulary: &[(String, usize)]) -> Self {
        let x = Var::new("x");
        let relations = vocabulary
            .iter()
            .map(|(name, arity)| {
                let params: Vec<Var> = (1..=*arity).map(|i| Var::new(format!("x{i}"))).collect();
                let body = Formula::rel(name.clone(), params.clone());
                (name.clone(), *arity, Definition::new(params, body))
            })
            .collect();
        FoInterpretation::new(1, vocabulary.to_vec(), Definition::new(vec![x.clone()], Formula::eq(x.clone(), x)), relations)
            .expect("identity is well-formed")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn source_vocabulary(&self) -> &[(String, usize)] {
        &self.source
    }

    pub fn target_vocabulary(&self) -> Vec<(String, usize)> {
        self.relations.iter().map(|(n, a, _)| (n.clone(), *a)).collect()
    }
}

/// The image of a structure under an interpretation. Element `e` of the
/// target stands for the source tuple `tuples[e]`.
#[derive(Debug, Clone)]
pub struct Interpreted {
    pub structure: Structure,
    pub tuples: Vec<Vec<usize>>,
    width: usize,
}

impl Interpreted {
    pub fn element_of(&self, tuple: &[usize]) -> Option<usize> {
        self.tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).ok()
    }

    /// The team over the block variables of `target.vars()` whose rows are
    /// the rows of `target` with every element replaced by its tuple.
    pub fn source_team(&self, target: &Team) -> Team {
        let vars: Vec<Var> = target.vars().iter().flat_map(|v| block_vars(v, self.width)).collect();
        let rows = target
            .rows()
            .iter()
            .map(|r| r.iter().flat_map(|&e| self.tuples[e].iter().copied()).collect::<Vec<usize>>());
        Team::from_rows(vars, rows).expect("block variables are distinct")
    }

    /// The inverse of [`Interpreted::source_team`]; `None` when some block
    /// is not a target element.
    pub fn target_team(&self, vars: &[Var], source: &Team) -> Option<Team> {
        let k = self.width;
        let mut rows = Vec::new();
        for r in source.rows() {
            let row: Option<Vec<usize>> = r.chunks(k).map(|b| self.element_of(b)).collect();
            rows.push(row?);
        }
        Team::from_rows(vars.to_vec(), rows).ok()
    }
}

/// Block variables `x'1 .. x'k` standing for the target variable `x`.
pub fn block_vars(x: &Var, k: usize) -> Vec<Var> {
    (1..=k).map(|i| Var::new(format!("{x}'{i}"))).collect()
}

fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(k as u32);
    (0..total).map(move |mut r| {
        let mut t = vec![0; k];
        for slot in t.iter_mut().rev() {
            *slot = r % n;
            r /= n;
        }
        t
    })
}

/// Builds the target structure. Target elements are the satisfying tuples
/// in lexicographic order, and built-in arithmetic reads each tuple as a
/// base-`n` numeral.
pub fn apply_interpretation(i: &FoInterpretation, a: &Structure) -> Result<Interpreted, ReduceError> {
    let mut voc = a.vocabulary();
    let mut want = i.source.clone();
    voc.sort();
    want.sort();
    if voc != want {
        return Err(ReduceError::Interpretation(format!(
            "source vocabulary {want:?} does not match structure vocabulary {voc:?}"
        )));
    }
    let n = a.size();
    let k = i.width;
    (n as u64)
        .checked_pow(k as u32)
        .filter(|&s| s <= 1 << 24)
        .ok_or(ReduceError::TooLarge)?;
    let ev = Evaluator::new(a);
    let dom = ev.prepare(&i.domain.params, &i.domain.body)?;
    let mut elements = Vec::new();
    for t in tuples(n, k) {
        if dom.eval_rows([t.as_slice()])? {
            elements.push(t);
        }
    }
    if elements.is_empty() {
        return Err(ReduceError::Interpretation("empty target domain".into()));
    }
    let mut b = Structure::new(elements.len())?;
    let base = (n as u128).checked_pow(k as u32).ok_or(ReduceError::TooLarge)?;
    let values = elements
        .iter()
        .map(|t| t.iter().fold(0u128, |acc, &x| acc * n as u128 + x as u128))
        .collect();
    b.set_numerals(Numerals { values, base });
    for (name, arity, d) in &i.relations {
        b.add_relation(name, *arity)?;
        let p = ev.prepare(&d.params, &d.body)?;
        for target in tuples(elements.len(), *arity) {
            let row: Vec<usize> = target.iter().flat_map(|&e| elements[e].iter().copied()).collect();
            if p.eval_rows([row.as_slice()])? {
                b.insert(name, &target)?;
            }
        }
    }
    Ok(Interpreted {
        structure: b,
        tuples: elements,
        width: k,
    })
}

struct Translator<'i> {
    i: &'i FoInterpretation,
    fresh: FreshVars,
}

impl Translator<'_> {
    fn blocks(&self, vs: &[Var]) -> Vec<Var> {
        vs.iter().flat_map(|v| block_vars(v, self.i.width)).collect()
    }

    fn domain(&mut self, x: &Var) -> Formula {
        let args = block_vars(x, self.i.width);
        self.i.domain.instantiate(&args, &mut self.fresh)
    }

    fn go(&mut self, f: &Formula) -> Result<Formula, ReduceError> {
        let k = self.i.width;
        Ok(match f {
            Formula::Rel {
                name,
                args,
                positive,
            } if is_builtin(name) => Formula::Rel {
                name: name.clone(),
                args: self.blocks(args),
                positive: *positive,
            },
            Formula::Rel {
                name,
                args,
                positive,
            } => {
                let (_, _, d) = self
                    .i
                    .relations
                    .iter()
                    .find(|(n, a, _)| n == name && *a == args.len())
                    .ok_or_else(|| ReduceError::UnknownSymbol(format!("{name}/{}", args.len())))?;
                let body = d.instantiate(&self.blocks(args), &mut self.fresh);
                if *positive {
                    body
                } else {
                    body.negate().expect("definitions are first-order")
                }
            }
            Formula::Eq {
                left,
                right,
                positive,
            } => {
                let pairs = block_vars(left, k).into_iter().zip(block_vars(right, k));
                if *positive {
                    Formula::and_all(pairs.map(|(l, r)| Formula::eq(l, r))).expect("k > 0")
                } else {
                    Formula::or_all(pairs.map(|(l, r)| Formula::neq(l, r))).expect("k > 0")
                }
            }
            Formula::Dep {
                determiners,
                dependent,
            } => {
                let u = self.blocks(determiners);
                Formula::and_all(block_vars(dependent, k).into_iter().map(|w| Formula::dep(u.clone(), w)))
                    .expect("k > 0")
            }
            Formula::Inc { sub, sup } => Formula::inc(self.blocks(sub), self.blocks(sup)),
            Formula::Ind { left, given, right } => {
                Formula::ind(self.blocks(left), self.blocks(given), self.blocks(right))
            }
            Formula::Gen { name, .. } => return Err(ReduceError::UnknownSymbol(name.clone())),
            Formula::And(l, r) => Formula::and(self.go(l)?, self.go(r)?),
            Formula::Or(l, r) => Formula::or(self.go(l)?, self.go(r)?),
            Formula::Exists(x, body) => {
                let inner = Formula::and(self.domain(x), self.go(body)?);
                Formula::exists_all(&block_vars(x, k), inner)
            }
            Formula::Forall(x, body) => {
                // The right disjunct repeats the domain condition so that a
                // lax split cannot hand it tuples outside the domain.
                let dom = self.domain(x);
                let outside = dom.negate().expect("domain formula is first-order");
                let inner = Formula::or(outside, Formula::and(dom, self.go(body)?));
                Formula::forall_all(&block_vars(x, k), inner)
            }
        })
    }
}

/// Translates a formula over the target vocabulary into one over the source
/// vocabulary with `A ⊨_X ψ ⇔ I(A) ⊨_{I(X)} φ`. Each free variable `x` of
/// `φ` becomes the block `x'1 .. x'k`, listed in `free` order.
pub fn translate_formula(i: &FoInterpretation, f: &Formula, free: &[Var]) -> Result<Formula, ReduceError> {
    if let Some(v) = f.free_vars().into_iter().find(|v| !free.contains(v)) {
        return Err(ReduceError::Interpretation(format!("free variable `{v}` not listed")));
    }
    let mut t = Translator {
        i,
        fresh: FreshVars::new("_q"),
    };
    let body = t.go(f)?;
    let mut parts = vec![body];
    for x in free {
        parts.push(t.domain(x));
    }
    Ok(Formula::and_all(parts).expect("nonempty"))
}
