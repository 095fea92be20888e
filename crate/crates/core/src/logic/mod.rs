//! A small Horn-clause engine: terms, unification, a textual clause syntax
//! and SLD resolution with proof recording.

mod error;
mod parser;
mod program;
mod solve;
mod subst;
mod term;

pub use error::{LogicError, SolveError};
pub use parser::{parse_program, parse_query, parse_term};
pub use program::{print_program, Program};
pub use solve::{solve, Limits, ProofStep, Solution, Solutions, DEFAULT_MAX_DEPTH, DEFAULT_MAX_STEPS};
pub use subst::{unify, Substitution};
pub use term::{Clause, CmpOp, Goal, Number, Symbol, Term};

pub(crate) use term::is_atom_name;

/// Returns a copy of `program` with `fact` appended.
pub fn assert_fact(program: &Program, fact: Clause) -> Result<Program, LogicError> {
    program.clone().with_fact(fact)
}
