//! 3-CNF formulas and the stable-tree hardness reduction.

mod cnf;
mod dichotomy;
mod reduction;

pub use cnf::{CnfError, CnfFormula};
pub use dichotomy::{verify_dichotomy, DichotomyReport};
pub use reduction::{build_reduction, decode_assignment, GadgetNetwork};
