use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::error::LogicError;
use super::solve::{compile_clause, CompiledClause};
use super::term::{Clause, Symbol, Term};

/// An ordered clause store indexed by predicate.
///
/// A `Program` is a plain value: build it (the `&mut self` methods act on an
/// exclusively owned builder), then share it read-only, typically behind an
/// `Arc`. Clause order within a predicate is insertion order.
#[derive(Clone, Default)]
pub struct Program {
    clauses: Vec<Clause>,
    compiled: Vec<Arc<CompiledClause>>,
    index: HashMap<(Symbol, usize), Vec<usize>>,
    /// Predicates that exist even without clauses, in declaration order.
    declared: Vec<(Symbol, usize)>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses the textual clause syntax. See [`crate::logic::parse_program`].
    pub fn parse(text: &str) -> Result<Program, LogicError> {
        super::parser::parse_program(text)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clause(&self, index: usize) -> Option<&Clause> {
        self.clauses.get(index)
    }

    pub fn declarations(&self) -> &[(Symbol, usize)] {
        &self.declared
    }

    /// Clause indices of a predicate, in insertion order. `None` when the
    /// predicate is neither declared nor defined.
    pub fn predicate(&self, name: &str, arity: usize) -> Option<&[usize]> {
        self.index
            .get(&(Symbol::from(name), arity))
            .map(Vec::as_slice)
    }

    pub fn is_defined(&self, name: &str, arity: usize) -> bool {
        self.predicate(name, arity).is_some()
    }

    /// Declares a predicate so that calling it with no clauses fails instead
    /// of raising `UnknownPredicate`.
    pub fn declare(&mut self, name: &str, arity: usize) {
        let key = (Symbol::from(name), arity);
        if !self.declared.contains(&key) {
            self.declared.push(key.clone());
        }
        self.index.entry(key).or_default();
    }

    /// Appends a fact or rule.
    pub fn push(&mut self, clause: Clause) -> Result<(), LogicError> {
        let key = match &clause.head {
            Term::Compound(name, args) => (name.clone(), args.len()),
            _ => {
                return Err(LogicError::InvalidClause {
                    clause: clause.to_string(),
                    reason: "head must be a compound term".into(),
                })
            }
        };
        if clause.is_fact() && !clause.head.is_ground() {
            return Err(LogicError::NonGroundFact(clause.to_string()));
        }
        let idx = self.clauses.len();
        self.compiled.push(Arc::new(compile_clause(&clause)));
        self.clauses.push(clause);
        self.index.entry(key).or_default().push(idx);
        Ok(())
    }

    /// Appends a ground fact to its predicate's clause list.
    pub fn assert_fact(&mut self, fact: Clause) -> Result<(), LogicError> {
        if !fact.is_fact() {
            return Err(LogicError::InvalidClause {
                clause: fact.to_string(),
                reason: "only facts can be asserted".into(),
            });
        }
        self.push(fact)
    }

    /// Value-style variant of [`Program::assert_fact`].
    pub fn with_fact(mut self, fact: Clause) -> Result<Program, LogicError> {
        self.assert_fact(fact)?;
        Ok(self)
    }

    /// Appends every declaration and clause of `other`.
    pub fn extend_from(&mut self, other: &Program) -> Result<(), LogicError> {
        for (name, arity) in &other.declared {
            self.declare(name, *arity);
        }
        for clause in &other.clauses {
            self.push(clause.clone())?;
        }
        Ok(())
    }

    pub(crate) fn compiled(&self, index: usize) -> &CompiledClause {
        &self.compiled[index]
    }

    pub(crate) fn lookup(&self, name: &Symbol, arity: usize) -> Option<&[usize]> {
        // Avoids allocating a key on the hot path when the symbol is shared.
        self.index.get(&(name.clone(), arity)).map(Vec::as_slice)
    }
}

/// Prints declarations first, then clauses one per line in source order.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, arity) in &self.declared {
            writeln!(f, ":- dynamic {name}/{arity}.")?;
        }
        for clause in &self.clauses {
            writeln!(f, "{clause}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Program")
            .field("declared", &self.declared)
            .field("clauses", &self.clauses)
            .finish()
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.declared == other.declared && self.clauses == other.clauses
    }
}

/// Renders a program in the textual syntax accepted by [`Program::parse`].
pub fn print_program(program: &Program) -> String {
    program.to_string()
}
