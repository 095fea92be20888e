use thiserror::Error;

/// Errors raised while building or parsing programs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogicError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: `{op}` takes 2 arguments, got {arity}")]
    Arity {
        op: String,
        arity: usize,
        line: usize,
        column: usize,
    },
    #[error("fact `{0}` is not ground")]
    NonGroundFact(String),
    #[error("invalid clause `{clause}`: {reason}")]
    InvalidClause { clause: String, reason: String },
}

/// Errors raised during resolution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("resolution budget exceeded after {steps} steps (depth {depth})")]
    BudgetExceeded { steps: u64, depth: usize },
    #[error("unknown predicate {name}/{arity}")]
    UnknownPredicate { name: String, arity: usize },
    #[error("arguments are not sufficiently instantiated in `{goal}`")]
    Instantiation { goal: String },
    #[error("type error in `{goal}`: {message}")]
    Type { goal: String, message: String },
}
