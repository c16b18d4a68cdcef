use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use super::{checked_space, CountError, CountOptions, CountResult, CountStats};
use crate::eval::{EvalError, Evaluator, Prepared};
use crate::formula::{Formula, Var};
use crate::structure::Structure;

fn all_rows(n: usize, k: usize, budget: u64) -> Result<Vec<Vec<usize>>, CountError> {
    let size = (n as u64).checked_pow(k as u32).filter(|&s| s <= budget.min(1 << 24));
    let Some(size) = size else {
        return Err(CountError::Budget {
            needed: format!("2^({n}^{k})"),
            budget,
        });
    };
    let mut rows = Vec::with_capacity(size as usize);
    let mut row = vec![0; k];
    for _ in 0..size {
        rows.push(row.clone());
        for d in row.iter_mut().rev() {
            *d += 1;
            if *d < n {
                break;
            }
            *d = 0;
        }
    }
    Ok(rows)
}

fn check_free(f: &Formula, vars: &[Var]) -> Result<(), CountError> {
    match f.free_vars().into_iter().find(|v| !vars.contains(v)) {
        Some(v) => Err(CountError::FreeVariable(v.to_string())),
        None => Ok(()),
    }
}

/// Number of nonempty teams over `vars` satisfying `f`.
pub fn count_teams(
    a: &Structure,
    f: &Formula,
    vars: &[Var],
    opts: &CountOptions,
) -> Result<CountResult, CountError> {
    count_teams_with(&Evaluator::new(a), f, vars, opts)
}

pub fn count_teams_with(
    ev: &Evaluator<'_>,
    f: &Formula,
    vars: &[Var],
    opts: &CountOptions,
) -> Result<CountResult, CountError> {
    check_free(f, vars)?;
    let p = ev.prepare(vars, f)?;
    let rows = all_rows(ev.structure().size(), vars.len(), opts.budget)?;
    if opts.prune && p.is_downward_closed() {
        return count_downward(&p, &rows, opts);
    }
    let space = checked_space(rows.len() as u64, opts.budget)?;
    let eval_mask = |mask: u64| -> Result<u64, EvalError> {
        let team = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, r)| r.as_slice());
        Ok(p.eval_rows(team)? as u64)
    };
    let count = if opts.parallel {
        (1..space)
            .into_par_iter()
            .map(eval_mask)
            .try_reduce(|| 0, |x, y| Ok(x + y))?
    } else {
        (1..space).map(eval_mask).sum::<Result<u64, _>>()?
    };
    Ok(CountResult::new(
        count,
        CountStats {
            nodes: space - 1,
            oracle_calls: 0,
        },
    ))
}

// Teams are grown by adding rows in increasing order; once a team fails,
// every extension fails too.
fn count_downward(p: &Prepared<'_>, rows: &[Vec<usize>], opts: &CountOptions) -> Result<CountResult, CountError> {
    let nodes = AtomicU64::new(0);
    let budget = opts.budget;
    let start = |j: usize| -> Result<u64, CountError> {
        let mut current = vec![j];
        let mut count = 0;
        dfs(p, rows, &mut current, &nodes, budget, &mut count)?;
        Ok(count)
    };
    let count = if opts.parallel {
        (0..rows.len())
            .into_par_iter()
            .map(start)
            .try_reduce(|| 0, |x, y| Ok(x + y))?
    } else {
        (0..rows.len()).map(start).sum::<Result<u64, _>>()?
    };
    Ok(CountResult::new(
        count,
        CountStats {
            nodes: nodes.load(Ordering::Relaxed),
            oracle_calls: 0,
        },
    ))
}

fn dfs(
    p: &Prepared<'_>,
    rows: &[Vec<usize>],
    current: &mut Vec<usize>,
    nodes: &AtomicU64,
    budget: u64,
    count: &mut u64,
) -> Result<(), CountError> {
    if nodes.fetch_add(1, Ordering::Relaxed) >= budget {
        return Err(CountError::Budget {
            needed: "more".into(),
            budget,
        });
    }
    if !p.eval_rows(current.iter().map(|&i| rows[i].as_slice()))? {
        return Ok(());
    }
    *count += 1;
    let last = *current.last().expect("nonempty");
    for j in last + 1..rows.len() {
        current.push(j);
        dfs(p, rows, current, nodes, budget, count)?;
        current.pop();
    }
    Ok(())
}

/// Counts nonempty satisfying teams of a union-closed formula by walking
/// down from the maximal satisfying team: from each team `T` found, the
/// maximal satisfying subteams of `T` minus one assignment are visited.
pub fn count_inclusion_teams(
    a: &Structure,
    f: &Formula,
    vars: &[Var],
    opts: &CountOptions,
) -> Result<CountResult, CountError> {
    count_inclusion_teams_with(&Evaluator::new(a), f, vars, opts)
}

pub fn count_inclusion_teams_with(
    ev: &Evaluator<'_>,
    f: &Formula,
    vars: &[Var],
    opts: &CountOptions,
) -> Result<CountResult, CountError> {
    check_free(f, vars)?;
    let p = ev.prepare(vars, f)?;
    if !p.is_union_closed() {
        return Err(EvalError::NotUnionClosed.into());
    }
    let n = ev.structure().size();
    let rows = all_rows(n, vars.len(), opts.budget)?;
    let rank = |r: &[usize]| r.iter().fold(0usize, |acc, &x| acc * n + x);
    let mut stats = CountStats::default();
    let mut maxsub = |members: &mut dyn Iterator<Item = usize>| -> Result<FixedBitSet, CountError> {
        stats.oracle_calls += 1;
        let sub: Vec<&[usize]> = members.map(|i| rows[i].as_slice()).collect();
        let m = p.max_subteam_rows(sub)?;
        let mut bits = FixedBitSet::with_capacity(rows.len());
        for r in &m {
            bits.insert(rank(r));
        }
        Ok(bits)
    };
    let top = maxsub(&mut (0..rows.len()))?;
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    let mut stack = Vec::new();
    if !top.is_clear() {
        seen.insert(top.clone());
        stack.push(top);
    }
    while let Some(t) = stack.pop() {
        stats.nodes += 1;
        if seen.len() as u64 > opts.budget {
            return Err(CountError::Budget {
                needed: "more".into(),
                budget: opts.budget,
            });
        }
        for s in t.ones() {
            let sub = maxsub(&mut t.ones().filter(|&i| i != s))?;
            if !sub.is_clear() && !seen.contains(&sub) {
                seen.insert(sub.clone());
                stack.push(sub);
            }
        }
    }
    Ok(CountResult::new(seen.len() as u64, stats))
}
