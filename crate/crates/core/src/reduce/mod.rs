//! Counting reductions between team logics and Boolean formulas, and the
//! library formulas that place Boolean counting problems in team logics.

mod builtin;
mod ground;
mod interp;
mod star;

use thiserror::Error;

use crate::cnf::CnfError;
use crate::count::CountError;
use crate::eval::EvalError;
use crate::formula::{FormulaError, NormalFormError};
use crate::structure::StructureError;

pub use builtin::{
    builtin_formula, BuiltinFormula, BUILTIN_NAMES, DEP_2CNF_PLUS, INCL_2CNF_PLUS, MYOPIC_DUALHORN,
    SIGMA11_CNFNEG,
};
pub use ground::{dep_to_sigma1cnf_neg, incl_to_sigma1_dualhorn, Grounding, IndexedPropVar, PropVarLayers};
pub use interp::{apply_interpretation, block_vars, translate_formula, Definition, FoInterpretation, Interpreted};
pub use star::{star_probe, star_turing_reduction, SearchOracle, StarOracle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error("only {0} atoms are supported here")]
    AtomKind(&'static str),
    #[error("formula is not {0}")]
    Class(&'static str),
    #[error("grounding is too large")]
    TooLarge,
    #[error("oracle fault: {0}")]
    OracleFault(String),
    #[error("unknown built-in formula `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("interpretation: {0}")]
    Interpretation(String),
}
