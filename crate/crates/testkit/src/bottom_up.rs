//! Naive bottom-up evaluation of function-free Horn programs.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use zoolog_core::logic::{Clause, CmpOp, Goal, Number, Program, Term};

/// A ground atom: predicate name and constant arguments.
pub type Fact = (String, Vec<Term>);

type Env = HashMap<String, Term>;

fn fact_of(term: &Term) -> Fact {
    match term {
        Term::Compound(name, args) => (name.to_string(), args.clone()),
        Term::Atom(name) => (name.to_string(), vec![]),
        other => panic!("not an atom: {other}"),
    }
}

fn resolve(term: &Term, env: &Env) -> Option<Term> {
    match term {
        Term::Var(v) => env.get(&**v).cloned(),
        Term::Compound(..) => panic!("function symbols are outside the oracle's fragment"),
        t => Some(t.clone()),
    }
}

/// Matches `pattern` args against constants, extending `env`.
fn matches(pattern: &[Term], values: &[Term], env: &Env) -> Option<Env> {
    if pattern.len() != values.len() {
        return None;
    }
    let mut env = env.clone();
    for (p, v) in pattern.iter().zip(values) {
        match p {
            Term::Var(name) => match env.get(&**name) {
                Some(bound) if bound != v => return None,
                Some(_) => {}
                None => {
                    env.insert(name.to_string(), v.clone());
                }
            },
            c if c == v => {}
            _ => return None,
        }
    }
    Some(env)
}

fn number(t: &Term) -> Option<(Option<i64>, f64)> {
    match t {
        Term::Number(Number::Int(i)) => Some((Some(*i), *i as f64)),
        Term::Number(Number::Float(f)) => Some((None, *f)),
        _ => None,
    }
}

/// Numeric order: exact on two integers, by float value otherwise.
fn compare(a: &Term, b: &Term) -> Ordering {
    let (na, nb) = match (number(a), number(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => panic!("comparison of non-numbers {a} and {b}"),
    };
    match (na.0, nb.0) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => na.1.partial_cmp(&nb.1).expect("finite"),
    }
}

fn holds(op: CmpOp, ord: Ordering) -> bool {
    match op {
        CmpOp::Ge => ord.is_ge(),
        CmpOp::Gt => ord.is_gt(),
        CmpOp::Le => ord.is_le(),
        CmpOp::Lt => ord.is_lt(),
        CmpOp::NumEq => ord.is_eq(),
    }
}

fn body_envs(body: &[Goal], env: Env, model: &HashSet<Fact>, out: &mut Vec<Env>) {
    let Some((goal, rest)) = body.split_first() else {
        out.push(env);
        return;
    };
    match goal {
        Goal::Call(t) => {
            let (name, pattern) = fact_of(t);
            for (fname, values) in model {
                if *fname == name {
                    if let Some(next) = matches(&pattern, values, &env) {
                        body_envs(rest, next, model, out);
                    }
                }
            }
        }
        Goal::Compare(op, a, b) => {
            let (a, b) = (
                resolve(a, &env).expect("range-restricted comparison"),
                resolve(b, &env).expect("range-restricted comparison"),
            );
            if holds(*op, compare(&a, &b)) {
                body_envs(rest, env, model, out);
            }
        }
        Goal::Unify(a, b) => match (resolve(a, &env), resolve(b, &env)) {
            (Some(x), Some(y)) => {
                if x == y {
                    body_envs(rest, env, model, out);
                }
            }
            (None, Some(v)) | (Some(v), None) => {
                let var = match (a, b) {
                    (Term::Var(n), _) if !env.contains_key(&**n) => n,
                    (_, Term::Var(n)) => n,
                    _ => unreachable!(),
                };
                let mut env = env;
                env.insert(var.to_string(), v);
                body_envs(rest, env, model, out);
            }
            (None, None) => panic!("unify of two unbound variables is outside the fragment"),
        },
    }
}

fn instantiate(head: &Term, env: &Env) -> Fact {
    let (name, args) = fact_of(head);
    let args = args
        .iter()
        .map(|a| resolve(a, env).expect("range-restricted head"))
        .collect();
    (name, args)
}

/// The least model of `program`, computed by iterating every rule over the
/// facts derived so far until nothing new appears.
pub fn least_model(program: &Program) -> HashSet<Fact> {
    let clauses: &[Clause] = program.clauses();
    let mut model: HashSet<Fact> = clauses.iter().filter(|c| c.is_fact()).map(|c| fact_of(&c.head)).collect();
    loop {
        let mut new = Vec::new();
        for rule in clauses.iter().filter(|c| !c.is_fact()) {
            let mut envs = Vec::new();
            body_envs(&rule.body, Env::new(), &model, &mut envs);
            for env in envs {
                let fact = instantiate(&rule.head, &env);
                if !model.contains(&fact) {
                    new.push(fact);
                }
            }
        }
        if new.is_empty() {
            return model;
        }
        model.extend(new);
    }
}

/// Facts of the model that are instances of `query`.
pub fn answers(model: &HashSet<Fact>, query: &Term) -> HashSet<Fact> {
    let (name, pattern) = fact_of(query);
    model
        .iter()
        .filter(|(n, values)| *n == name && matches(&pattern, values, &Env::new()).is_some())
        .cloned()
        .collect()
}

/// Instantiates `query` under a solver substitution, for comparison with
/// [`answers`].
pub fn ground_query(query: &Term, bindings: &zoolog_core::logic::Substitution) -> Fact {
    fact_of(&bindings.apply(query))
}
