//! Party subsets, entropy vectors, the information-expression language and its
//! compilation to linear functionals.

pub mod expr;
pub mod functional;
pub mod party;
pub mod vector;

pub use expr::{
    compile_str, parse_expression, parse_relation, Atom, InfoExpression, Relation, RelationOp,
    Term,
};
pub use functional::LinearFunctional;
pub use party::{card_lex_subsets, coordinate_count, permutations, subsets, PartySet};
pub use vector::{
    format_rational, parse_rational, AnyEntropyVector, EntropyVector, ExactVector, FloatVector,
    Scalar,
};

use crate::error::Result;

pub fn compile_expression(expr: &InfoExpression) -> LinearFunctional {
    expr.compile()
}

pub fn evaluate<T: Scalar>(f: &LinearFunctional, v: &EntropyVector<T>) -> Result<T> {
    f.evaluate(v)
}

/// See [`LinearFunctional::purified_eliminate`].
pub fn purified_eliminate(f: &LinearFunctional, purifier: usize) -> Result<LinearFunctional> {
    f.purified_eliminate(purifier)
}
