pub mod chain;
pub mod cnf;
pub mod count;
pub mod eval;
pub mod formula;
pub mod reduce;
pub mod structure;

pub use num_bigint::BigUint;
pub use num_rational::BigRational;

/// Exact count of teams, relations or assignments.
pub type Count = BigUint;
/// Exact rational used by interpolation.
pub type Rational = BigRational;
