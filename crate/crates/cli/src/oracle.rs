//! Brute-force counterparts used by --verify. They enumerate candidates
//! directly and evaluate with the definitional evaluator.

use anyhow::{bail, Result};
use num_bigint::BigUint;
use teamcount::chain::{Carrier, PairedInstance};
use teamcount::cnf::QbFormula;
use teamcount::count::{count_teams_with, CountOptions, RelationalQuery};
use teamcount::eval::{eval_tarski, Evaluator, Strategy};
use teamcount::formula::{Formula, Var};
use teamcount::structure::{Assignment, Structure, Team};

use crate::Mode;

const MAX_BITS: u32 = 24;

fn masks(bits: usize, what: &str) -> Result<std::ops::Range<u64>> {
    if bits as u32 > MAX_BITS {
        bail!("{what}: 2^{bits} candidates is too many for the brute-force check");
    }
    Ok(0..1u64 << bits)
}

fn bits(mask: u64, len: usize) -> Vec<bool> {
    (0..len).map(|i| mask >> i & 1 == 1).collect()
}

pub fn assignments(f: &QbFormula, mode: Mode) -> Result<BigUint> {
    let n = f.num_vars() as usize;
    let free: Vec<usize> = f.free_vars().iter().map(|&v| v as usize - 1).collect();
    let bound: Vec<usize> = f.bound_vars().iter().map(|&v| v as usize - 1).collect();
    if mode == Mode::All {
        return Ok(masks(n, "assignments")?.filter(|&m| f.satisfied_by(&bits(m, n))).count().into());
    }
    masks(n, "assignments")?;
    let mut count = 0u64;
    for fm in 0..1u64 << free.len() {
        if mode == Mode::Star && fm == 0 {
            continue;
        }
        let mut a = vec![false; n];
        for (i, &v) in free.iter().enumerate() {
            a[v] = fm >> i & 1 == 1;
        }
        let extends = (0..1u64 << bound.len()).any(|bm| {
            for (i, &v) in bound.iter().enumerate() {
                a[v] = bm >> i & 1 == 1;
            }
            f.satisfied_by(&a)
        });
        count += u64::from(extends);
    }
    Ok(count.into())
}

pub fn teams(a: &Structure, f: &Formula, vars: &[Var], budget: u64) -> Result<BigUint> {
    let ev = Evaluator::new(a).with_strategy(Strategy::Definitional).with_budget(budget);
    let opts = CountOptions::brute_force().with_budget(budget);
    Ok(count_teams_with(&ev, f, vars, &opts)?.count)
}

pub fn max_subteam(a: &Structure, team: &Team, f: &Formula, budget: u64) -> Result<Team> {
    let ev = Evaluator::new(a).with_strategy(Strategy::Definitional).with_budget(budget);
    let rows: Vec<Vec<usize>> = team.rows().iter().cloned().collect();
    let mut union = std::collections::BTreeSet::new();
    for m in masks(rows.len(), "subteams")? {
        let sub = team.with_rows((0..rows.len()).filter(|&i| m >> i & 1 == 1).map(|i| rows[i].clone()).collect());
        if ev.eval(&sub, f)? {
            union.extend(sub.rows().iter().cloned());
        }
    }
    Ok(team.with_rows(union))
}

fn load(b: &mut Structure, rels: &[(String, usize)], mask: u64) -> Result<()> {
    let mut offset = 0;
    for (name, _) in rels {
        let r = b.relation_mut(name).expect("declared");
        for t in 0..r.table_len() {
            r.set_rank(t, mask >> (offset + t) & 1 == 1);
        }
        offset += r.table_len();
    }
    Ok(())
}

fn declare(b: &mut Structure, rels: &[(String, usize)]) -> Result<usize> {
    let mut total = 0;
    for (name, arity) in rels {
        b.add_relation(name, *arity)?;
        total += b.relation(name).expect("declared").table_len();
    }
    Ok(total)
}

pub fn relations(a: &Structure, q: &RelationalQuery, nonempty: bool) -> Result<BigUint> {
    let mut b = a.clone();
    let free_bits = declare(&mut b, &q.free_relations)?;
    let second_bits = declare(&mut b, &q.second_order)?;
    let n = a.size();
    let k = q.free_vars.len();
    masks(free_bits + second_bits, "relations")?;
    let mut count = 0u64;
    for fm in 0..1u64 << free_bits {
        if nonempty && fm == 0 {
            continue;
        }
        load(&mut b, &q.free_relations, fm)?;
        for r in 0..n.pow(k as u32) {
            let mut s = Assignment::new();
            let mut rest = r;
            for v in q.free_vars.iter().rev() {
                s.set(v.clone(), rest % n);
                rest /= n;
            }
            let mut holds = false;
            for sm in 0..1u64 << second_bits {
                load(&mut b, &q.second_order, sm)?;
                if eval_tarski(&b, &s, &q.body)? {
                    holds = true;
                    break;
                }
            }
            count += u64::from(holds);
        }
    }
    Ok(count.into())
}

/// Solutions of the carrier accepted by the companion, by enumerating edge
/// subsets or models.
pub fn paired(p: &PairedInstance) -> Result<BigUint> {
    let e = p.solution_vars() as usize;
    let psi = p.companion();
    let accepts = |sel: &[bool]| -> bool {
        let free = psi.free_vars();
        let bound = psi.bound_vars();
        let mut a = vec![false; psi.num_vars() as usize];
        for (&v, &x) in free.iter().zip(sel) {
            a[v as usize - 1] = x;
        }
        (0..1u64 << bound.len()).any(|bm| {
            for (i, &v) in bound.iter().enumerate() {
                a[v as usize - 1] = bm >> i & 1 == 1;
            }
            psi.satisfied_by(&a)
        })
    };
    let mut count = 0u64;
    for m in masks(e, "solutions")? {
        let sel = bits(m, e);
        let ok = match p.carrier() {
            Carrier::Cnf(phi) => phi.satisfied_by(&sel),
            _ => p.is_solution(|i| sel[i]),
        };
        count += u64::from(ok && accepts(&sel));
    }
    Ok(count.into())
}
