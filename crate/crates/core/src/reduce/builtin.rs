use super::ReduceError;
use crate::count::RelationalQuery;
use crate::formula::{parse_formula, Formula, Var};

/// Two-variable positive CNF: team values of `t` are the true variables.
pub const INCL_2CNF_PLUS: &str = "A x. A y. (!C(x,y) | inc(x;t) | inc(y;t))";

/// Two-variable positive CNF: team values of `t` are the false variables,
/// and `x'` picks the value of `x` with the least element meaning false.
pub const DEP_2CNF_PLUS: &str = "E min. ((A z. <=(min,z)) & A x. A y. E x'. E y'. \
(dep(x;x') & dep(y;y') & (x!=y | x'=y') & (x!=t | x'=min) & (!C(x,y) | x'!=min | y'!=min)))";

/// Over `F, B, P, N`: `T` is a set of free variables whose complement, with
/// some assignment `S` of the bound ones, satisfies every clause.
pub const SIGMA11_CNFNEG: &str = "ER S/1. (A x. (!T(x) | F(x))) & A c. (F(c) | B(c) \
| E x. (N(c,x) & ((B(x) & !S(x)) | (F(x) & !T(x)))) | E x. (P(c,x) & B(x) & S(x)))";

/// Over `C, P, N`: every clause is satisfied by the variables in `R`, as
/// seen from each member of `R`.
pub const MYOPIC_DUALHORN: &str = "A x. (!R(x) | (!C(x) & A c. ((!C(c) | E z. N(c,z) \
| E y. (P(c,y) & R(y))) & (!N(c,x) | E y. (P(c,y) & R(y))))))";

pub const BUILTIN_NAMES: [&str; 4] = ["incl-2cnf+", "dep-2cnf+", "sigma11-cnfneg", "myopic-dualhorn"];

/// A library formula and the vocabulary of the structures it reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuiltinFormula {
    /// Counted by satisfying nonempty teams over `vars`.
    Team {
        formula: Formula,
        vars: Vec<Var>,
        vocabulary: Vec<(String, usize)>,
    },
    /// Counted by satisfying nonempty relations.
    Relational {
        query: RelationalQuery,
        vocabulary: Vec<(String, usize)>,
    },
}

impl BuiltinFormula {
    pub fn vocabulary(&self) -> &[(String, usize)] {
        match self {
            BuiltinFormula::Team { vocabulary, .. } | BuiltinFormula::Relational { vocabulary, .. } => vocabulary,
        }
    }
}

fn voc(items: &[(&str, usize)]) -> Vec<(String, usize)> {
    items.iter().map(|&(n, a)| (n.to_string(), a)).collect()
}

pub fn builtin_formula(name: &str) -> Result<BuiltinFormula, ReduceError> {
    let team = |text: &str| -> Result<BuiltinFormula, ReduceError> {
        Ok(BuiltinFormula::Team {
            formula: parse_formula(text)?,
            vars: vec![Var::new("t")],
            vocabulary: voc(&[("C", 2)]),
        })
    };
    match name {
        "incl-2cnf+" => team(INCL_2CNF_PLUS),
        "dep-2cnf+" => team(DEP_2CNF_PLUS),
        "sigma11-cnfneg" => Ok(BuiltinFormula::Relational {
            query: RelationalQuery::parse(SIGMA11_CNFNEG, voc(&[("T", 1)]), Some(vec![]))?,
            vocabulary: voc(&[("F", 1), ("B", 1), ("P", 2), ("N", 2)]),
        }),
        "myopic-dualhorn" => Ok(BuiltinFormula::Relational {
            query: RelationalQuery::parse(MYOPIC_DUALHORN, voc(&[("R", 1)]), Some(vec![]))?,
            vocabulary: voc(&[("C", 1), ("P", 2), ("N", 2)]),
        }),
        _ => Err(ReduceError::UnknownBuiltin(name.to_string())),
    }
}
