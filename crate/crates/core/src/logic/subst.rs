use std::collections::BTreeMap;
use std::fmt;

use super::term::{Symbol, Term};

/// Variable bindings in solved form: no bound variable appears in any
/// binding's term, so applying a substitution once is the same as applying
/// it repeatedly.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Symbol, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Term)> {
        self.bindings.iter()
    }

    pub fn apply(&self, term: &Term) -> Term {
        match term {
            Term::Var(v) => match self.bindings.get(v) {
                Some(bound) => self.apply(bound),
                None => term.clone(),
            },
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            _ => term.clone(),
        }
    }

    /// Builds a substitution from already-resolved bindings. Used by the
    /// solver, which only hands out fully dereferenced terms.
    pub(crate) fn from_resolved(bindings: BTreeMap<Symbol, Term>) -> Self {
        Substitution { bindings }
    }

    fn walk<'a>(&'a self, mut term: &'a Term) -> &'a Term {
        while let Term::Var(v) = term {
            match self.bindings.get(v) {
                Some(next) => term = next,
                None => break,
            }
        }
        term
    }

    fn occurs(&self, var: &str, term: &Term) -> bool {
        match self.walk(term) {
            Term::Var(v) => &**v == var,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(var, a)),
            _ => false,
        }
    }

    fn unify_in_place(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if self.occurs(x, other) {
                    return false;
                }
                self.bindings.insert(x.clone(), other.clone());
                true
            }
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Number(x), Term::Number(y)) => x == y,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| self.unify_in_place(x, y))
            }
            _ => false,
        }
    }

    fn normalize(mut self) -> Self {
        let resolved: BTreeMap<Symbol, Term> = self
            .bindings
            .iter()
            .map(|(k, v)| (k.clone(), self.apply(v)))
            .collect();
        self.bindings = resolved;
        self
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        f.write_str("}")
    }
}

/// Most general unifier of `a` and `b` extending `s`, with the occurs check.
/// `None` means no such unifier exists.
pub fn unify(a: &Term, b: &Term, s: &Substitution) -> Option<Substitution> {
    let mut out = s.clone();
    out.unify_in_place(a, b).then(|| out.normalize())
}
