//! Finite relational structures and teams.

mod encode;
mod io;
mod team;

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::{is_builtin, BUILTIN_ADD, BUILTIN_LE, BUILTIN_MUL};

pub use encode::{
    decode_sigma1cnf_neg, encode_2cnf_plus, encode_dualhorn, encode_sigma1cnf_neg,
    encode_structure, validate_sigma1cnf_neg_structure, ElementKind, FormulaEncoding,
};
pub use io::{parse_structure, parse_team, write_structure, write_team};
pub use team::{Assignment, Team};

/// Largest relation table kept in memory, in tuples.
pub const MAX_TABLE: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("domain must be nonempty")]
    EmptyDomain,
    #[error("relation `{0}` declared twice")]
    DuplicateRelation(String),
    #[error("`{0}` is a built-in relation")]
    BuiltinName(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{name}` has arity {expected}, got {found} arguments")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("element {value} out of range for domain size {n}")]
    OutOfRange { value: usize, n: usize },
    #[error("relation table of {0} tuples is too large")]
    TooLarge(u64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vocabulary mismatch: {0}")]
    Vocabulary(String),
    #[error("team: {0}")]
    Team(String),
    #[error("formula is not {0}")]
    Class(&'static str),
}

fn table_size(n: usize, arity: usize) -> Result<usize, StructureError> {
    let mut size: u64 = 1;
    for _ in 0..arity {
        size = size.saturating_mul(n as u64);
        if size > MAX_TABLE {
            return Err(StructureError::TooLarge(size));
        }
    }
    Ok(size as usize)
}

/// A relation stored as a dense bit table indexed by lexicographic tuple rank.
#[derive(Clone, PartialEq, Eq)]
pub struct Relation {
    n: usize,
    arity: usize,
    bits: FixedBitSet,
}

impl Relation {
    pub fn new(n: usize, arity: usize) -> Result<Self, StructureError> {
        Ok(Relation {
            n,
            arity,
            bits: FixedBitSet::with_capacity(table_size(n, arity)?),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn rank(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &x| acc * self.n + x)
    }

    pub fn unrank(&self, mut r: usize) -> Vec<usize> {
        let mut t = vec![0; self.arity];
        for slot in t.iter_mut().rev() {
            *slot = r % self.n;
            r /= self.n;
        }
        t
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.bits.contains(self.rank(tuple))
    }

    pub fn contains_rank(&self, r: usize) -> bool {
        self.bits.contains(r)
    }

    pub fn set_rank(&mut self, r: usize, value: bool) {
        self.bits.set(r, value);
    }

    pub fn insert(&mut self, tuple: &[usize]) -> Result<(), StructureError> {
        if tuple.len() != self.arity {
            return Err(StructureError::Arity {
                name: String::new(),
                expected: self.arity,
                found: tuple.len(),
            });
        }
        if let Some(&value) = tuple.iter().find(|&&x| x >= self.n) {
            return Err(StructureError::OutOfRange { value, n: self.n });
        }
        let r = self.rank(tuple);
        self.bits.insert(r);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Number of tuple slots, `n^arity`.
    pub fn table_len(&self) -> usize {
        self.bits.len()
    }

    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.bits.ones().map(|r| self.unrank(r))
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.tuples()).finish()
    }
}

/// Values used by the built-in arithmetic relations. Elements of an
/// interpreted structure stand for tuples, read as numerals below `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Numerals {
    pub values: Vec<u128>,
    pub base: u128,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Structure {
    n: usize,
    names: Vec<String>,
    relations: Vec<Relation>,
    index: HashMap<String, usize>,
    numerals: Option<Numerals>,
}

impl Structure {
    pub fn new(n: usize) -> Result<Self, StructureError> {
        if n == 0 {
            return Err(StructureError::EmptyDomain);
        }
        Ok(Structure {
            n,
            names: Vec::new(),
            relations: Vec::new(),
            index: HashMap::new(),
            numerals: None,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), StructureError> {
        if is_builtin(name) {
            return Err(StructureError::BuiltinName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(StructureError::DuplicateRelation(name.to_string()));
        }
        self.index.insert(name.to_string(), self.names.len());
        self.names.push(name.to_string());
        self.relations.push(Relation::new(self.n, arity)?);
        Ok(())
    }

    pub fn with_relation<T: AsRef<[usize]>>(
        mut self,
        name: &str,
        arity: usize,
        tuples: impl IntoIterator<Item = T>,
    ) -> Result<Self, StructureError> {
        self.add_relation(name, arity)?;
        for t in tuples {
            self.insert(name, t.as_ref())?;
        }
        Ok(self)
    }

    pub fn insert(&mut self, name: &str, tuple: &[usize]) -> Result<(), StructureError> {
        let i = self.relation_index(name)?;
        self.relations[i].insert(tuple).map_err(|e| match e {
            StructureError::Arity {
                expected, found, ..
            } => StructureError::Arity {
                name: name.to_string(),
                expected,
                found,
            },
            e => e,
        })
    }

    pub fn relation_index(&self, name: &str) -> Result<usize, StructureError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| StructureError::UnknownRelation(name.to_string()))
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.index.get(name).map(|&i| &self.relations[i])
    }

    pub fn relation_mut(&mut self, name: &str) -> Option<&mut Relation> {
        self.index.get(name).map(|&i| &mut self.relations[i])
    }

    pub fn relation_at(&self, i: usize) -> &Relation {
        &self.relations[i]
    }

    pub fn relation_at_mut(&mut self, i: usize) -> &mut Relation {
        &mut self.relations[i]
    }

    /// Declared relations in order, as `(name, arity)`.
    pub fn vocabulary(&self) -> Vec<(String, usize)> {
        self.names
            .iter()
            .zip(&self.relations)
            .map(|(n, r)| (n.clone(), r.arity))
            .collect()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.names.iter().map(String::as_str).zip(&self.relations)
    }

    pub fn numerals(&self) -> Option<&Numerals> {
        self.numerals.as_ref()
    }

    pub fn set_numerals(&mut self, numerals: Numerals) {
        assert_eq!(numerals.values.len(), self.n);
        self.numerals = Some(numerals);
    }

    fn numeral(&self, e: usize) -> u128 {
        match &self.numerals {
            Some(nm) => nm.values[e],
            None => e as u128,
        }
    }

    fn numeral_base(&self) -> u128 {
        self.numerals.as_ref().map_or(self.n as u128, |nm| nm.base)
    }

    /// Reads `args` as `parts` equal blocks, each a numeral with the most
    /// significant digit first.
    fn blocks(&self, args: &[usize], parts: usize) -> Option<Vec<u128>> {
        if args.is_empty() || args.len() % parts != 0 {
            return None;
        }
        let base = self.numeral_base();
        Some(
            args.chunks(args.len() / parts)
                .map(|b| {
                    b.iter()
                        .fold(0u128, |acc, &e| acc.saturating_mul(base).saturating_add(self.numeral(e)))
                })
                .collect(),
        )
    }

    /// Truth value of a built-in atom, or `None` for an unknown name or bad arity.
    pub fn builtin(&self, name: &str, args: &[usize]) -> Option<bool> {
        match name {
            BUILTIN_LE => self.blocks(args, 2).map(|v| v[0] <= v[1]),
            BUILTIN_ADD => self
                .blocks(args, 3)
                .map(|v| v[0].checked_add(v[1]) == Some(v[2])),
            BUILTIN_MUL => self
                .blocks(args, 3)
                .map(|v| v[0].checked_mul(v[1]) == Some(v[2])),
            _ => None,
        }
    }

    /// Truth value of `name(args)` for a declared or built-in relation.
    pub fn holds(&self, name: &str, args: &[usize]) -> Result<bool, StructureError> {
        if is_builtin(name) {
            return self.builtin(name, args).ok_or_else(|| StructureError::Arity {
                name: name.to_string(),
                expected: 0,
                found: args.len(),
            });
        }
        let r = &self.relations[self.relation_index(name)?];
        if r.arity != args.len() {
            return Err(StructureError::Arity {
                name: name.to_string(),
                expected: r.arity,
                found: args.len(),
            });
        }
        Ok(r.contains(args))
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Structure");
        d.field("n", &self.n);
        for (name, r) in self.relations() {
            d.field(name, r);
        }
        d.finish()
    }
}
