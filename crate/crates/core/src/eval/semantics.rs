use std::cell::{Cell, RefCell};
use std::collections::{BTreeSet, HashMap, HashSet};

use super::compile::{Compiled, NodeKind, RelRef};
use super::{EvalError, Strategy};
use crate::structure::Structure;

pub(crate) type Row = Vec<u32>;

pub(crate) fn normalize(mut rows: Vec<Row>) -> Vec<Row> {
    rows.sort_unstable();
    rows.dedup();
    rows
}

fn project(rows: &[Row], slots: &[usize]) -> BTreeSet<Vec<usize>> {
    rows.iter()
        .map(|r| slots.iter().map(|&s| r[s] as usize).collect())
        .collect()
}

fn key(row: &Row, slots: &[usize]) -> Vec<u32> {
    slots.iter().map(|&s| row[s]).collect()
}

/// One evaluation: step counter and memo table over a compiled formula.
pub(crate) struct Run<'c> {
    c: &'c Compiled,
    a: &'c Structure,
    n: u32,
    strategy: Strategy,
    budget: u64,
    steps: Cell<u64>,
    memo: RefCell<HashMap<(usize, Vec<Row>), bool>>,
}

impl<'c> Run<'c> {
    pub fn new(c: &'c Compiled, a: &'c Structure, strategy: Strategy, budget: u64) -> Self {
        Run {
            c,
            a,
            n: a.size() as u32,
            strategy,
            budget,
            steps: Cell::new(0),
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps.get()
    }

    fn tick(&self, k: u64) -> Result<(), EvalError> {
        let s = self.steps.get().saturating_add(k);
        self.steps.set(s);
        if s > self.budget {
            Err(EvalError::BudgetExceeded {
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    pub fn root(&self) -> usize {
        self.c.root
    }

    // ---- pointwise semantics ----

    pub fn tarski(&self, node: usize, row: &mut Row) -> bool {
        match &self.c.nodes[node].kind {
            NodeKind::Rel {
                name,
                rel,
                args,
                positive,
            } => {
                let holds = match rel {
                    RelRef::Declared(i) => {
                        let n = self.n as usize;
                        let r = args.iter().fold(0usize, |acc, &s| acc * n + row[s] as usize);
                        self.a.relation_at(*i).contains_rank(r)
                    }
                    RelRef::Builtin => {
                        let vals: Vec<usize> = args.iter().map(|&s| row[s] as usize).collect();
                        self.a.builtin(name, &vals).unwrap_or(false)
                    }
                };
                holds == *positive
            }
            NodeKind::Eq { l, r, positive } => (row[*l] == row[*r]) == *positive,
            NodeKind::And(l, r) => self.tarski(*l, row) && self.tarski(*r, row),
            NodeKind::Or(l, r) => self.tarski(*l, row) || self.tarski(*r, row),
            NodeKind::Exists(v, b) | NodeKind::Forall(v, b) => {
                let universal = matches!(self.c.nodes[node].kind, NodeKind::Forall(..));
                let saved = row[*v];
                let mut result = universal;
                for a in 0..self.n {
                    row[*v] = a;
                    if self.tarski(*b, row) != universal {
                        result = !universal;
                        break;
                    }
                }
                row[*v] = saved;
                result
            }
            _ => unreachable!("dependency atom in first-order position"),
        }
    }

    fn all_pointwise(&self, node: usize, team: &[Row]) -> bool {
        let mut row = Row::new();
        team.iter().all(|r| {
            row.clone_from(r);
            self.tarski(node, &mut row)
        })
    }

    fn atom(&self, node: usize, team: &[Row]) -> bool {
        match &self.c.nodes[node].kind {
            NodeKind::Rel { .. } | NodeKind::Eq { .. } => self.all_pointwise(node, team),
            NodeKind::Dep { det, dep } => {
                let mut seen: HashMap<Vec<u32>, u32> = HashMap::new();
                team.iter()
                    .all(|r| *seen.entry(key(r, det)).or_insert(r[*dep]) == r[*dep])
            }
            NodeKind::Inc { sub, sup } => {
                let sups: HashSet<Vec<u32>> = team.iter().map(|r| key(r, sup)).collect();
                team.iter().all(|r| sups.contains(&key(r, sub)))
            }
            NodeKind::Ind { left, given, right } => {
                // Within each group of equal `given` values the (left, right)
                // pairs must form the full product of their projections.
                type Group = (HashSet<Vec<u32>>, HashSet<Vec<u32>>, HashSet<(Vec<u32>, Vec<u32>)>);
                let mut groups: HashMap<Vec<u32>, Group> = HashMap::new();
                for r in team {
                    let g = groups.entry(key(r, given)).or_default();
                    let (y, z) = (key(r, left), key(r, right));
                    g.0.insert(y.clone());
                    g.1.insert(z.clone());
                    g.2.insert((y, z));
                }
                groups.values().all(|(y, z, p)| p.len() == y.len() * z.len())
            }
            NodeKind::Gen { atom, args } => {
                let rels: Vec<BTreeSet<Vec<usize>>> = args.iter().map(|t| project(team, t)).collect();
                atom.holds(self.n as usize, &rels)
            }
            _ => unreachable!("not an atom"),
        }
    }

    fn expand(&self, team: &[Row], v: usize) -> Vec<Row> {
        let mut out = Vec::with_capacity(team.len() * self.n as usize);
        for r in team {
            for a in 0..self.n {
                let mut s = r.clone();
                s[v] = a;
                out.push(s);
            }
        }
        normalize(out)
    }

    // ---- team semantics ----

    /// Whether `team` (sorted, without duplicates) satisfies `node`.
    pub fn sat(&self, node: usize, team: &[Row]) -> Result<bool, EvalError> {
        self.tick(1)?;
        match self.strategy {
            Strategy::Definitional => self.sat_definitional(node, team),
            Strategy::Optimized => self.sat_optimized(node, team),
        }
    }

    fn sat_definitional(&self, node: usize, team: &[Row]) -> Result<bool, EvalError> {
        match &self.c.nodes[node].kind {
            NodeKind::And(l, r) => Ok(self.sat(*l, team)? && self.sat(*r, team)?),
            NodeKind::Or(l, r) => self.or_all_covers(*l, *r, team),
            NodeKind::Forall(v, b) => self.sat(*b, &self.expand(team, *v)),
            NodeKind::Exists(v, b) => self.exists_all_functions(*v, *b, team),
            _ => Ok(self.atom(node, team)),
        }
    }

    // Every pair Y, Z with Y ∪ Z = team: each row goes left, right or both.
    fn or_all_covers(&self, l: usize, r: usize, team: &[Row]) -> Result<bool, EvalError> {
        let mut digits = vec![0u8; team.len()];
        loop {
            self.tick(1)?;
            let mut y = Vec::new();
            let mut z = Vec::new();
            for (row, &d) in team.iter().zip(&digits) {
                if d != 1 {
                    y.push(row.clone());
                }
                if d != 0 {
                    z.push(row.clone());
                }
            }
            if self.sat(l, &y)? && self.sat(r, &z)? {
                return Ok(true);
            }
            if !odometer(&mut digits, 3) {
                return Ok(false);
            }
        }
    }

    // Every supplementing function: a nonempty value set per row.
    fn exists_all_functions(&self, v: usize, b: usize, team: &[Row]) -> Result<bool, EvalError> {
        let n = self.n as usize;
        if n >= 63 {
            return Err(EvalError::BudgetExceeded {
                budget: self.budget,
            });
        }
        let choices = (1u64 << n) - 1;
        let mut digits = vec![0u64; team.len()];
        let mut tried: HashSet<Vec<Row>> = HashSet::new();
        loop {
            self.tick(1)?;
            let mut out = Vec::new();
            for (row, &d) in team.iter().zip(&digits) {
                let mask = d + 1;
                for a in 0..n {
                    if mask >> a & 1 == 1 {
                        let mut s = row.clone();
                        s[v] = a as u32;
                        out.push(s);
                    }
                }
            }
            let out = normalize(out);
            let fresh = self.strategy == Strategy::Definitional || tried.insert(out.clone());
            if fresh && self.sat(b, &out)? {
                return Ok(true);
            }
            if !odometer(&mut digits, choices) {
                return Ok(false);
            }
        }
    }

    fn memoized(
        &self,
        node: usize,
        team: &[Row],
        f: impl FnOnce() -> Result<bool, EvalError>,
    ) -> Result<bool, EvalError> {
        let k = (node, team.to_vec());
        if let Some(&v) = self.memo.borrow().get(&k) {
            return Ok(v);
        }
        let v = f()?;
        self.memo.borrow_mut().insert(k, v);
        Ok(v)
    }

    fn sat_optimized(&self, node: usize, team: &[Row]) -> Result<bool, EvalError> {
        let nd = &self.c.nodes[node];
        if team.is_empty() && !nd.has_gen {
            return Ok(true);
        }
        if nd.fo {
            return Ok(self.all_pointwise(node, team));
        }
        if nd.union {
            return Ok(self.maxsub(node, team)?.len() == team.len());
        }
        match &nd.kind {
            NodeKind::And(l, r) => Ok(self.sat(*l, team)? && self.sat(*r, team)?),
            NodeKind::Forall(v, b) => self.sat(*b, &self.expand(team, *v)),
            NodeKind::Exists(v, b) => {
                if self.c.nodes[*b].downward {
                    let mut slots = vec![*v];
                    let mut body = *b;
                    while let NodeKind::Exists(w, inner) = &self.c.nodes[body].kind {
                        slots.push(*w);
                        body = *inner;
                    }
                    self.exists_block(&slots, body, team)
                } else {
                    self.memoized(node, team, || self.exists_all_functions(*v, *b, team))
                }
            }
            NodeKind::Or(l, r) => self.or_optimized(node, *l, *r, team),
            _ => Ok(self.atom(node, team)),
        }
    }

    fn or_optimized(&self, node: usize, l: usize, r: usize, team: &[Row]) -> Result<bool, EvalError> {
        let (ln, rn) = (&self.c.nodes[l], &self.c.nodes[r]);
        if ln.union || rn.union {
            let (u, other) = if ln.union { (l, r) } else { (r, l) };
            // Any left part is inside the maximal subteam M, and M itself
            // satisfies `u`, so only the right part needs a search.
            let m = self.maxsub(u, team)?;
            let mset: HashSet<&Row> = m.iter().collect();
            let rest: Vec<Row> = team.iter().filter(|s| !mset.contains(s)).cloned().collect();
            if self.c.nodes[other].downward {
                return self.sat(other, &rest);
            }
            let mut mask = vec![0u8; m.len()];
            loop {
                self.tick(1)?;
                let mut z = rest.clone();
                z.extend(m.iter().zip(&mask).filter(|(_, &b)| b == 1).map(|(s, _)| s.clone()));
                if self.sat(other, &normalize(z))? {
                    return Ok(true);
                }
                if !odometer(&mut mask, 2) {
                    return Ok(false);
                }
            }
        }
        if ln.downward && rn.downward {
            let mut y = Vec::new();
            let mut z = Vec::new();
            return self.partition(l, r, team, 0, &mut y, &mut z);
        }
        self.memoized(node, team, || self.or_all_covers(l, r, team))
    }

    // Downward-closed disjuncts: disjoint covers suffice and a failing
    // partial side can be abandoned.
    fn partition(
        &self,
        l: usize,
        r: usize,
        team: &[Row],
        i: usize,
        y: &mut Vec<Row>,
        z: &mut Vec<Row>,
    ) -> Result<bool, EvalError> {
        if i == team.len() {
            return Ok(true);
        }
        self.tick(1)?;
        for side in [0, 1] {
            let (part, f) = if side == 0 { (&mut *y, l) } else { (&mut *z, r) };
            part.push(team[i].clone());
            let ok = self.extend_ok(f, part)?;
            if !ok {
                part.pop();
                continue;
            }
            let found = self.partition(l, r, team, i + 1, y, z)?;
            if side == 0 { y.pop() } else { z.pop() };
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// With `partial` minus its last row known to satisfy the
    /// downward-closed `node`, whether all of `partial` does.
    fn extend_ok(&self, node: usize, partial: &[Row]) -> Result<bool, EvalError> {
        let nd = &self.c.nodes[node];
        let last = partial.last().expect("nonempty partial team");
        if nd.fo {
            let mut row = last.clone();
            return Ok(self.tarski(node, &mut row));
        }
        match &nd.kind {
            NodeKind::Dep { det, dep } => {
                let k = key(last, det);
                Ok(partial.iter().all(|s| s[*dep] == last[*dep] || key(s, det) != k))
            }
            NodeKind::And(l, r) => Ok(self.extend_ok(*l, partial)? && self.extend_ok(*r, partial)?),
            _ => self.sat(node, &normalize(partial.to_vec())),
        }
    }

    // Downward-closed body: single values per row suffice, chosen row by row.
    fn exists_block(&self, slots: &[usize], body: usize, team: &[Row]) -> Result<bool, EvalError> {
        let mut partial = Vec::with_capacity(team.len());
        self.block_dfs(slots, body, team, &mut partial)
    }

    fn block_dfs(
        &self,
        slots: &[usize],
        body: usize,
        team: &[Row],
        partial: &mut Vec<Row>,
    ) -> Result<bool, EvalError> {
        let i = partial.len();
        if i == team.len() {
            return Ok(true);
        }
        let mut digits = vec![0u32; slots.len()];
        loop {
            self.tick(1)?;
            let mut s = team[i].clone();
            for (&v, &a) in slots.iter().zip(&digits) {
                s[v] = a;
            }
            partial.push(s);
            if self.extend_ok(body, partial)? && self.block_dfs(slots, body, team, partial)? {
                return Ok(true);
            }
            partial.pop();
            if !odometer(&mut digits, self.n) {
                return Ok(false);
            }
        }
    }

    // ---- maximal satisfying subteam (union-closed formulas) ----

    /// Union of all subteams of `team` satisfying `node`, which must be
    /// union closed.
    pub fn maxsub(&self, node: usize, team: &[Row]) -> Result<Vec<Row>, EvalError> {
        self.tick(1)?;
        let nd = &self.c.nodes[node];
        if !nd.union {
            return Err(EvalError::NotUnionClosed);
        }
        if team.is_empty() {
            return Ok(Vec::new());
        }
        if nd.fo {
            let mut row = Row::new();
            return Ok(team
                .iter()
                .filter(|r| {
                    row.clone_from(r);
                    self.tarski(node, &mut row)
                })
                .cloned()
                .collect());
        }
        match &nd.kind {
            NodeKind::Inc { sub, sup } => {
                let mut cur = team.to_vec();
                loop {
                    self.tick(1)?;
                    let sups: HashSet<Vec<u32>> = cur.iter().map(|r| key(r, sup)).collect();
                    let next: Vec<Row> = cur
                        .iter()
                        .filter(|r| sups.contains(&key(r, sub)))
                        .cloned()
                        .collect();
                    if next.len() == cur.len() {
                        return Ok(cur);
                    }
                    cur = next;
                }
            }
            NodeKind::And(l, r) => {
                let mut cur = team.to_vec();
                loop {
                    let next = self.maxsub(*r, &self.maxsub(*l, &cur)?)?;
                    if next.len() == cur.len() {
                        return Ok(cur);
                    }
                    cur = next;
                }
            }
            NodeKind::Or(l, r) => {
                let mut m = self.maxsub(*l, team)?;
                m.extend(self.maxsub(*r, team)?);
                Ok(normalize(m))
            }
            NodeKind::Exists(v, b) => {
                let m: HashSet<Row> = self.maxsub(*b, &self.expand(team, *v))?.into_iter().collect();
                Ok(team
                    .iter()
                    .filter(|s| self.some_value_in(s, *v, &m))
                    .cloned()
                    .collect())
            }
            NodeKind::Forall(v, b) => {
                let mut cur = team.to_vec();
                loop {
                    let m: HashSet<Row> =
                        self.maxsub(*b, &self.expand(&cur, *v))?.into_iter().collect();
                    let next: Vec<Row> = cur
                        .iter()
                        .filter(|s| self.all_values_in(s, *v, &m))
                        .cloned()
                        .collect();
                    if next.len() == cur.len() {
                        return Ok(cur);
                    }
                    cur = next;
                }
            }
            _ => Err(EvalError::NotUnionClosed),
        }
    }

    fn some_value_in(&self, s: &Row, v: usize, m: &HashSet<Row>) -> bool {
        let mut t = s.clone();
        (0..self.n).any(|a| {
            t[v] = a;
            m.contains(&t)
        })
    }

    fn all_values_in(&self, s: &Row, v: usize, m: &HashSet<Row>) -> bool {
        let mut t = s.clone();
        (0..self.n).all(|a| {
            t[v] = a;
            m.contains(&t)
        })
    }
}

/// Advances a little-endian counter with the given radix; false on wrap-around.
fn odometer<T>(digits: &mut [T], radix: T) -> bool
where
    T: Copy + PartialEq + std::ops::AddAssign + From<u8>,
{
    for d in digits.iter_mut() {
        *d += T::from(1);
        if *d != radix {
            return true;
        }
        *d = T::from(0);
    }
    false
}

#[cfg(test)]
pub(crate) fn project_for_test(rows: &[Row], slots: &[usize]) -> BTreeSet<Vec<usize>> {
    project(rows, slots)
}
