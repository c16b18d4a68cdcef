use rayon::prelude::*;

use super::{checked_space, CountError, CountOptions, CountResult, CountStats};
use crate::eval::{EvalError, Evaluator, Prepared};
use crate::formula::{parse_formula, Formula, Var};
use crate::structure::{Structure, StructureError};

/// A first-order formula with free relation symbols and free individual
/// variables, optionally under an existential second-order prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalQuery {
    /// Existentially quantified relations, evaluated by enumeration.
    pub second_order: Vec<(String, usize)>,
    /// Relations being counted.
    pub free_relations: Vec<(String, usize)>,
    /// Individual variables being counted.
    pub free_vars: Vec<Var>,
    pub body: Formula,
}

impl RelationalQuery {
    /// Free variables default to those of `body` in sorted order.
    pub fn new(
        second_order: Vec<(String, usize)>,
        free_relations: Vec<(String, usize)>,
        free_vars: Option<Vec<Var>>,
        body: Formula,
    ) -> Self {
        let free_vars = free_vars.unwrap_or_else(|| body.free_vars().into_iter().collect());
        RelationalQuery {
            second_order,
            free_relations,
            free_vars,
            body,
        }
    }

    /// Parses `ER S/1. ER U/2. <formula>`: leading `ER NAME/ARITY.` prefixes
    /// quantify relations existentially.
    pub fn parse(
        text: &str,
        free_relations: Vec<(String, usize)>,
        free_vars: Option<Vec<Var>>,
    ) -> Result<Self, CountError> {
        let mut rest = text.trim_start();
        let mut second_order = Vec::new();
        while let Some(after) = rest.strip_prefix("ER ") {
            let Some((decl, tail)) = after.split_once('.') else {
                return Err(CountError::Class("a relation prefix `ER NAME/ARITY.`"));
            };
            second_order.push(parse_decl(decl)?);
            rest = tail.trim_start();
        }
        let body = parse_formula(rest)?;
        Ok(Self::new(second_order, free_relations, free_vars, body))
    }
}

/// Parses `NAME/ARITY`.
pub fn parse_decl(text: &str) -> Result<(String, usize), CountError> {
    let bad = || CountError::Class("a relation declaration `NAME/ARITY`");
    let (name, arity) = text.trim().split_once('/').ok_or_else(bad)?;
    let arity = arity.trim().parse().map_err(|_| bad())?;
    let name = name.trim();
    if name.is_empty() {
        return Err(bad());
    }
    Ok((name.to_string(), arity))
}

struct Layout {
    /// (relation index, first bit, table size)
    free: Vec<(usize, usize, usize)>,
    second: Vec<(usize, usize, usize)>,
    free_bits: usize,
    second_bits: usize,
}

fn place(b: &mut Structure, rels: &[(String, usize)]) -> Result<(Vec<(usize, usize, usize)>, usize), CountError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (name, arity) in rels {
        b.add_relation(name, *arity)?;
        let i = b.relation_index(name)?;
        let size = b.relation_at(i).table_len();
        out.push((i, offset, size));
        offset += size;
    }
    Ok((out, offset))
}

fn load(b: &mut Structure, slots: &[(usize, usize, usize)], mask: u64) {
    for &(i, offset, size) in slots {
        let r = b.relation_at_mut(i);
        for t in 0..size {
            r.set_rank(t, mask >> (offset + t) & 1 == 1);
        }
    }
}

/// Number of tuples `(R1..Rk, c1..cl)` with `A ⊨ ∃S̄ φ(R̄, c̄)`. With
/// `nonempty_only`, the choice where every counted relation is empty is
/// skipped.
pub fn count_relations(
    a: &Structure,
    q: &RelationalQuery,
    nonempty_only: bool,
    opts: &CountOptions,
) -> Result<CountResult, CountError> {
    count_relations_with(a, q, nonempty_only, opts)
}

pub fn count_relations_with(
    a: &Structure,
    q: &RelationalQuery,
    nonempty_only: bool,
    opts: &CountOptions,
) -> Result<CountResult, CountError> {
    if q.body.atom_usage().any() {
        return Err(CountError::Class("first-order"));
    }
    if let Some(v) = q.body.free_vars().into_iter().find(|v| !q.free_vars.contains(v)) {
        return Err(CountError::FreeVariable(v.to_string()));
    }
    let mut b = a.clone();
    let (free, free_bits) = place(&mut b, &q.free_relations)?;
    let (second, second_bits) = place(&mut b, &q.second_order)?;
    let layout = Layout {
        free,
        second,
        free_bits,
        second_bits,
    };
    let n = a.size() as u64;
    let tuples = n
        .checked_pow(q.free_vars.len() as u32)
        .ok_or(StructureError::TooLarge(u64::MAX))?;
    let outer = checked_space(layout.free_bits as u64, opts.budget)?;
    let inner = checked_space(layout.second_bits as u64, opts.budget)?;
    let total = outer
        .checked_mul(tuples)
        .and_then(|x| x.checked_mul(inner))
        .filter(|&x| x <= opts.budget)
        .ok_or_else(|| CountError::Budget {
            needed: format!("2^{} * {} * 2^{}", layout.free_bits, tuples, layout.second_bits),
            budget: opts.budget,
        })?;

    let p = Evaluator::new(&b).prepare(&q.free_vars, &q.body)?;
    let k = q.free_vars.len();
    let first = if nonempty_only { 1 } else { 0 };
    let one_choice = |b: &mut Structure, mask: u64| -> Result<u64, EvalError> {
        load(b, &layout.free, mask);
        let mut hits = 0;
        let mut row = vec![0usize; k];
        for _ in 0..tuples {
            if exists_second_order(&p, b, &layout, inner, &row)? {
                hits += 1;
            }
            for d in row.iter_mut().rev() {
                *d += 1;
                if *d < n as usize {
                    break;
                }
                *d = 0;
            }
        }
        Ok(hits)
    };
    let count = if opts.parallel {
        (first..outer)
            .into_par_iter()
            .map_init(|| b.clone(), |b, mask| one_choice(b, mask))
            .try_reduce(|| 0, |x, y| Ok(x + y))?
    } else {
        let mut scratch = b.clone();
        let mut sum = 0;
        for mask in first..outer {
            sum += one_choice(&mut scratch, mask)?;
        }
        sum
    };
    Ok(CountResult::new(
        count,
        CountStats {
            nodes: total,
            oracle_calls: 0,
        },
    ))
}

fn exists_second_order(
    p: &Prepared<'_>,
    b: &mut Structure,
    layout: &Layout,
    inner: u64,
    row: &[usize],
) -> Result<bool, EvalError> {
    for s in 0..inner {
        load(b, &layout.second, s);
        if p.eval_rows_on(b, [row])? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(q: &str, rels: &[(&str, usize)], nonempty: bool) -> u64 {
        let a = Structure::new(2).unwrap();
        let rels = rels.iter().map(|&(n, k)| (n.to_string(), k)).collect();
        let q = RelationalQuery::parse(q, rels, None).unwrap();
        let c = count_relations(&a, &q, nonempty, &CountOptions::default()).unwrap();
        u64::try_from(c.count).unwrap()
    }

    #[test]
    fn unary_relation_counts() {
        assert_eq!(count("A x. R(x)", &[("R", 1)], false), 1);
        assert_eq!(count("E x. R(x)", &[("R", 1)], false), 3);
        assert_eq!(count("x=x", &[("R", 1)], true), 3 * 2);
    }

    #[test]
    fn second_order_prefix() {
        // Some S strictly between R and the full domain.
        assert_eq!(count("ER S/1. A x. ((!R(x) | S(x)) & E y. !S(y))", &[("R", 1)], false), 3);
    }

    #[test]
    fn rejects_dependency_atoms() {
        let a = Structure::new(2).unwrap();
        let q = RelationalQuery::parse("dep(;x)", vec![], None).unwrap();
        assert!(count_relations(&a, &q, false, &CountOptions::default()).is_err());
    }
}
