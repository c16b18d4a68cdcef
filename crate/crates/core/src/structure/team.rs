use std::collections::{BTreeMap, BTreeSet};

use super::StructureError;
use crate::formula::Var;

/// A total map from variables to domain elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(BTreeMap<Var, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<V: Into<Var>>(pairs: impl IntoIterator<Item = (V, usize)>) -> Self {
        Assignment(pairs.into_iter().map(|(v, a)| (v.into(), a)).collect())
    }

    pub fn get(&self, v: &Var) -> Option<usize> {
        self.0.get(v).copied()
    }

    pub fn set(&mut self, v: impl Into<Var>, a: usize) {
        self.0.insert(v.into(), a);
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, usize)> {
        self.0.iter().map(|(v, &a)| (v, a))
    }
}

/// A set of assignments over a common ordered variable tuple, stored as value rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Team {
    vars: Vec<Var>,
    rows: BTreeSet<Vec<usize>>,
}

impl Team {
    pub fn new(vars: Vec<Var>) -> Result<Self, StructureError> {
        let distinct: BTreeSet<&Var> = vars.iter().collect();
        if distinct.len() != vars.len() {
            return Err(StructureError::Team("repeated variable".into()));
        }
        Ok(Team {
            vars,
            rows: BTreeSet::new(),
        })
    }

    pub fn from_rows<R: Into<Vec<usize>>>(
        vars: Vec<Var>,
        rows: impl IntoIterator<Item = R>,
    ) -> Result<Self, StructureError> {
        let mut t = Team::new(vars)?;
        for r in rows {
            t.insert(r.into())?;
        }
        Ok(t)
    }

    /// All `n^|vars|` assignments.
    pub fn full(vars: Vec<Var>, n: usize) -> Result<Self, StructureError> {
        let mut t = Team::new(vars)?;
        let k = t.vars.len();
        let mut row = vec![0; k];
        loop {
            t.rows.insert(row.clone());
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(t);
                }
                i -= 1;
                row[i] += 1;
                if row[i] < n {
                    break;
                }
                row[i] = 0;
            }
        }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rows(&self) -> &BTreeSet<Vec<usize>> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, row: Vec<usize>) -> Result<bool, StructureError> {
        if row.len() != self.vars.len() {
            return Err(StructureError::Team(format!(
                "row of length {} for {} variables",
                row.len(),
                self.vars.len()
            )));
        }
        Ok(self.rows.insert(row))
    }

    pub fn remove(&mut self, row: &[usize]) -> bool {
        self.rows.remove(row)
    }

    pub fn contains(&self, row: &[usize]) -> bool {
        self.rows.contains(row)
    }

    pub fn position(&self, v: &Var) -> Option<usize> {
        self.vars.iter().position(|w| w == v)
    }

    /// Largest element mentioned, if any.
    pub fn max_value(&self) -> Option<usize> {
        self.rows.iter().flatten().copied().max()
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.rows
            .iter()
            .map(|r| Assignment(self.vars.iter().cloned().zip(r.iter().copied()).collect()))
    }

    /// The value tuples of the team restricted to `vs`.
    pub fn project(&self, vs: &[Var]) -> Result<BTreeSet<Vec<usize>>, StructureError> {
        let idx = vs
            .iter()
            .map(|v| {
                self.position(v)
                    .ok_or_else(|| StructureError::Team(format!("variable `{v}` not in team")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i]).collect())
            .collect())
    }

    pub fn restrict(&self, vs: &[Var]) -> Result<Team, StructureError> {
        let rows = self.project(vs)?;
        Ok(Team {
            vars: vs.to_vec(),
            rows,
        })
    }

    pub fn is_subset(&self, other: &Team) -> bool {
        self.vars == other.vars && self.rows.is_subset(&other.rows)
    }

    pub fn union(&self, other: &Team) -> Result<Team, StructureError> {
        if self.vars != other.vars {
            return Err(StructureError::Team("variable tuples differ".into()));
        }
        Ok(Team {
            vars: self.vars.clone(),
            rows: self.rows.union(&other.rows).cloned().collect(),
        })
    }

    pub fn with_rows(&self, rows: BTreeSet<Vec<usize>>) -> Team {
        Team {
            vars: self.vars.clone(),
            rows,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::vars;

    #[test]
    fn full_team_size() {
        let t = Team::full(vars(&["x", "y"]), 3).unwrap();
        assert_eq!(t.len(), 9);
        assert_eq!(Team::full(vec![], 3).unwrap().len(), 1);
    }

    #[test]
    fn projection_matches_coordinates() {
        let t = Team::from_rows(vars(&["x", "y", "z"]), [vec![0, 1, 2], vec![1, 1, 0]]).unwrap();
        let p = t.project(&vars(&["z", "y"])).unwrap();
        assert_eq!(p, [vec![2, 1], vec![0, 1]].into_iter().collect());
        assert!(t.project(&vars(&["w"])).is_err());
        assert!(Team::new(vars(&["x", "x"])).is_err());
    }
}
