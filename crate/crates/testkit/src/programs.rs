//! Random nonrecursive, function-free Horn programs with comparisons.
//!
//! Predicates are numbered and rules only call lower-numbered ones, so no
//! program recurses. Each argument position is typed atom or number and
//! comparisons only ever see bound numeric variables, which keeps every
//! program inside the fragment [`crate::bottom_up`] evaluates.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use zoolog_core::logic::{parse_term, CmpOp, Program, Term};

pub const MAX_PREDICATES: usize = 8;
pub const MAX_FACTS: usize = 30;
pub const MAX_RULES: usize = 5;

const ATOMS: &[&str] = &["a", "b", "c", "d", "zebra"];
const NUMBERS: &[&str] = &["0", "1", "2", "3", "5", "0.5", "2.0", "2.5", "4.75", "-1"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Col {
    Atom,
    Num,
}

#[derive(Clone, Debug)]
pub struct RandomProgram {
    pub source: String,
    pub program: Program,
    /// One query per predicate, with a mix of variables and constants.
    pub queries: Vec<Term>,
}

fn constant(rng: &mut impl Rng, col: Col) -> String {
    match col {
        Col::Atom => ATOMS.choose(rng).unwrap().to_string(),
        Col::Num => NUMBERS.choose(rng).unwrap().to_string(),
    }
}

fn random_rule(rng: &mut impl Rng, head: usize, sigs: &[Vec<Col>]) -> String {
    let mut vars: Vec<(String, Col)> = Vec::new();
    let mut goals: Vec<String> = Vec::new();
    let fresh = |vars: &mut Vec<(String, Col)>, col: Col| {
        let name = format!("V{}", vars.len());
        vars.push((name.clone(), col));
        name
    };

    for k in 0..rng.gen_range(1..=3) {
        let callee = rng.gen_range(0..head);
        // Later calls share a variable with earlier ones where the types
        // allow it, so bodies are joins rather than cross products.
        let joinable: Vec<usize> = (0..sigs[callee].len())
            .filter(|&i| vars.iter().any(|v| v.1 == sigs[callee][i]))
            .collect();
        let join_at = if k > 0 { joinable.choose(rng).copied() } else { None };
        let mut args = Vec::new();
        for (i, &col) in sigs[callee].iter().enumerate() {
            let same: Vec<String> = vars.iter().filter(|v| v.1 == col).map(|v| v.0.clone()).collect();
            let arg = match rng.gen_range(0..10) {
                _ if join_at == Some(i) => same.choose(rng).unwrap().clone(),
                0..=1 => constant(rng, col),
                2..=4 if !same.is_empty() => same.choose(rng).unwrap().clone(),
                _ => fresh(&mut vars, col),
            };
            args.push(arg);
        }
        goals.push(format!("p{callee}({})", args.join(", ")));
    }

    let numeric: Vec<String> = vars.iter().filter(|v| v.1 == Col::Num).map(|v| v.0.clone()).collect();
    if !numeric.is_empty() && rng.gen_bool(0.6) {
        let op = CmpOp::ALL.choose(rng).unwrap().symbol();
        let lhs = numeric.choose(rng).unwrap().clone();
        let rhs = if rng.gen_bool(0.5) {
            numeric.choose(rng).unwrap().clone()
        } else {
            constant(rng, Col::Num)
        };
        goals.push(format!("{lhs} {op} {rhs}"));
    }
    if rng.gen_bool(0.3) {
        let col = if rng.gen_bool(0.5) { Col::Atom } else { Col::Num };
        let value = constant(rng, col);
        let same: Vec<String> = vars.iter().filter(|v| v.1 == col).map(|v| v.0.clone()).collect();
        let var = match same.choose(rng) {
            Some(v) if rng.gen_bool(0.5) => v.clone(),
            _ => fresh(&mut vars, col),
        };
        goals.push(format!("{var} = {value}"));
    }

    let head_args: Vec<String> = sigs[head]
        .iter()
        .map(|&col| {
            let same: Vec<&String> = vars.iter().filter(|v| v.1 == col).map(|v| &v.0).collect();
            match same.choose(rng) {
                Some(v) if rng.gen_bool(0.85) => (*v).clone(),
                _ => constant(rng, col),
            }
        })
        .collect();
    format!("p{head}({}) :- {}.", head_args.join(", "), goals.join(", "))
}

pub fn random_program(rng: &mut impl Rng) -> RandomProgram {
    let n = rng.gen_range(2..=MAX_PREDICATES);
    let sigs: Vec<Vec<Col>> = (0..n)
        .map(|_| {
            (0..rng.gen_range(1..=3))
                .map(|_| if rng.gen_bool(0.5) { Col::Atom } else { Col::Num })
                .collect()
        })
        .collect();

    let mut source = String::new();
    for (p, sig) in sigs.iter().enumerate() {
        let _ = writeln!(source, ":- dynamic p{p}/{}.", sig.len());
    }
    for _ in 0..rng.gen_range(0..=MAX_FACTS) {
        // Lower-numbered predicates get more facts so rule bodies have data.
        let p = rng.gen_range(0..n).min(rng.gen_range(0..n));
        let args: Vec<String> = sigs[p].iter().map(|&c| constant(rng, c)).collect();
        let _ = writeln!(source, "p{p}({}).", args.join(", "));
    }
    for _ in 0..rng.gen_range(0..=MAX_RULES) {
        let head = rng.gen_range(1..n);
        let _ = writeln!(source, "{}", random_rule(rng, head, &sigs));
    }

    let queries = (0..n)
        .map(|p| {
            let args: Vec<String> = sigs[p]
                .iter()
                .enumerate()
                .map(|(i, &c)| match rng.gen_range(0..10) {
                    0..=1 => constant(rng, c),
                    2 if i > 0 => "Q0".to_string(),
                    _ => format!("Q{i}"),
                })
                .collect();
            parse_term(&format!("p{p}({})", args.join(", "))).expect("generated query parses")
        })
        .collect();

    let program = Program::parse(&source).unwrap_or_else(|e| panic!("generated program fails to parse: {e}\n{source}"));
    RandomProgram {
        source,
        program,
        queries,
    }
}
