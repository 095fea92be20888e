//! Terms, goals and clauses of the Horn-clause language.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Interned-by-sharing symbol text used for atoms, functors and variable names.
pub type Symbol = Arc<str>;

/// A numeric constant. Floats are always finite.
#[derive(Clone, Copy, Debug)]
pub enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    /// Builds a float, rejecting NaN and infinities.
    pub fn float(value: f64) -> Option<Number> {
        value.is_finite().then_some(Number::Float(value))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }

    /// Numeric comparison. Two integers compare exactly; anything mixed is
    /// promoted to float.
    pub fn compare(self, other: Number) -> std::cmp::Ordering {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a.cmp(&b),
            (a, b) => a.as_f64().total_cmp(&b.as_f64()),
        }
    }
}

// Structural identity: 3 and 3.0 are different terms, as in most logic
// languages. Numeric equality lives in `compare`.
impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a == b,
            (Number::Float(a), Number::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Number {}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Number::Int(i) => {
                0u8.hash(state);
                i.hash(state);
            }
            Number::Float(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            // Debug formatting is the shortest representation that parses
            // back to the same bits and always marks the value as a float.
            Number::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl From<i64> for Number {
    fn from(value: i64) -> Self {
        Number::Int(value)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Atom(Symbol),
    Number(Number),
    Var(Symbol),
    Compound(Symbol, Vec<Term>),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Symbol::from(name))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::from(name))
    }

    pub fn int(value: i64) -> Term {
        Term::Number(Number::Int(value))
    }

    /// Panics on non-finite input; use [`Number::float`] for fallible
    /// construction.
    pub fn float(value: f64) -> Term {
        Term::Number(Number::float(value).expect("non-finite float in term"))
    }

    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        assert!(!args.is_empty(), "compound terms need at least one argument");
        Term::Compound(Symbol::from(functor), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    /// Functor name and arity for compound terms.
    pub fn indicator(&self) -> Option<(&str, usize)> {
        match self {
            Term::Compound(name, args) => Some((name, args.len())),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<Number> {
        match self {
            Term::Number(n) => Some(*n),
            _ => None,
        }
    }

    /// Variable names in order of first occurrence.
    pub fn variables(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Symbol>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => &**v == name,
            Term::Compound(_, args) => args.iter().any(|a| a.contains_var(name)),
            _ => false,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Atom(a) => f.write_str(a),
            Term::Number(n) => write!(f, "{n}"),
            Term::Var(v) => f.write_str(v),
            Term::Compound(name, args) => {
                write!(f, "{name}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Arithmetic comparison built-ins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Ge,
    Gt,
    Le,
    Lt,
    NumEq,
}

impl CmpOp {
    pub const ALL: [CmpOp; 5] = [CmpOp::Ge, CmpOp::Gt, CmpOp::Le, CmpOp::Lt, CmpOp::NumEq];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Le => "=<",
            CmpOp::Lt => "<",
            CmpOp::NumEq => "=:=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CmpOp> {
        CmpOp::ALL.into_iter().find(|op| op.symbol() == s)
    }

    pub fn holds(self, lhs: Number, rhs: Number) -> bool {
        use std::cmp::Ordering::*;
        let ord = lhs.compare(rhs);
        match self {
            CmpOp::Ge => ord != Less,
            CmpOp::Gt => ord == Greater,
            CmpOp::Le => ord != Greater,
            CmpOp::Lt => ord == Less,
            CmpOp::NumEq => ord == Equal,
        }
    }
}

/// One conjunct of a rule body or query.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Goal {
    /// A call to a user predicate; always a compound term.
    Call(Term),
    Compare(CmpOp, Term, Term),
    /// `=`: syntactic unification.
    Unify(Term, Term),
}

impl Goal {
    pub fn call(term: Term) -> Goal {
        debug_assert!(matches!(term, Term::Compound(..)));
        Goal::Call(term)
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Symbol>) {
        match self {
            Goal::Call(t) => t.collect_vars(out),
            Goal::Compare(_, a, b) | Goal::Unify(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn variables(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Call(t) => write!(f, "{t}"),
            Goal::Compare(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Goal::Unify(a, b) => write!(f, "{a} = {b}"),
        }
    }
}

/// A Horn clause. An empty body makes it a fact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Goal>,
}

impl Clause {
    pub fn fact(head: Term) -> Clause {
        Clause { head, body: Vec::new() }
    }

    pub fn rule(head: Term, body: Vec<Goal>) -> Clause {
        Clause { head, body }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn indicator(&self) -> Option<(&str, usize)> {
        self.head.indicator()
    }

    pub fn variables(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.head.collect_vars(&mut out);
        for goal in &self.body {
            goal.collect_vars(&mut out);
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, goal) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{goal}")?;
            }
        }
        f.write_str(".")
    }
}

pub(crate) fn is_atom_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_print_distinct_from_ints() {
        assert_eq!(Term::int(10).to_string(), "10");
        assert_eq!(Term::float(10.0).to_string(), "10.0");
        assert_eq!(Term::float(1e21).to_string(), "1e21");
    }

    #[test]
    fn mixed_comparison_promotes() {
        assert!(CmpOp::NumEq.holds(Number::Int(3), Number::Float(3.0)));
        assert!(CmpOp::Lt.holds(Number::Int(2), Number::Float(2.5)));
        assert_ne!(Term::int(3), Term::float(3.0));
    }

    #[test]
    fn name_classes() {
        assert!(is_atom_name("polar_bear"));
        assert!(!is_atom_name("Polar"));
        assert!(!is_atom_name("ours_blanc\u{e9}"));
        assert!(is_var_name("X1"));
        assert!(is_var_name("_Tmp"));
        assert!(!is_var_name("x"));
    }

    #[test]
    fn clause_display() {
        let rule = Clause::rule(
            Term::compound("animal_exists", vec![Term::var("A"), Term::var("C")]),
            vec![
                Goal::call(Term::compound("animal", vec![Term::var("A"), Term::var("C")])),
                Goal::Compare(CmpOp::Ge, Term::var("C"), Term::int(1)),
            ],
        );
        assert_eq!(rule.to_string(), "animal_exists(A, C) :- animal(A, C), C >= 1.");
    }
}
