//! SLD resolution over a [`Program`].
//!
//! Clauses are compiled once into a cell representation where variables are
//! numbered per clause. At each resolution step the clause's variables are
//! placed at a fresh offset in a shared binding store, and undone on
//! backtracking through a trail, so trying a clause that does not match costs
//! no allocation beyond a cheap first-level argument filter.
//!
//! Selection is leftmost-goal, clauses are tried in insertion order, and the
//! occurs check is always on.

use std::collections::BTreeMap;
use std::rc::Rc;
use std::sync::Arc;

use super::error::SolveError;
use super::program::Program;
use super::subst::Substitution;
use super::term::{Clause, CmpOp, Goal, Number, Symbol, Term};

pub const DEFAULT_MAX_STEPS: u64 = 100_000;
pub const DEFAULT_MAX_DEPTH: usize = 10_000;

/// Resolution budget for one `solve` call, shared by every solution it
/// enumerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: u64,
    pub max_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: DEFAULT_MAX_STEPS,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

impl Limits {
    pub fn steps(max_steps: u64) -> Self {
        Limits {
            max_steps,
            ..Limits::default()
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Cell {
    Atom(Symbol),
    Num(Number),
    Var(usize),
    Comp(Symbol, Arc<[Cell]>),
}

#[derive(Clone, Debug)]
pub(crate) enum CGoal {
    Call(Cell),
    Cmp(CmpOp, Cell, Cell),
    Unify(Cell, Cell),
}

#[derive(Debug)]
pub(crate) struct CompiledClause {
    head: Cell,
    body: Vec<CGoal>,
    nvars: usize,
}

fn compile_term(term: &Term, vars: &mut Vec<Symbol>) -> Cell {
    match term {
        Term::Atom(a) => Cell::Atom(a.clone()),
        Term::Number(n) => Cell::Num(*n),
        Term::Var(v) => {
            let idx = match vars.iter().position(|x| x == v) {
                Some(i) => i,
                None => {
                    vars.push(v.clone());
                    vars.len() - 1
                }
            };
            Cell::Var(idx)
        }
        Term::Compound(f, args) => Cell::Comp(
            f.clone(),
            args.iter().map(|a| compile_term(a, vars)).collect(),
        ),
    }
}

fn compile_goal(goal: &Goal, vars: &mut Vec<Symbol>) -> CGoal {
    match goal {
        Goal::Call(t) => CGoal::Call(compile_term(t, vars)),
        Goal::Compare(op, a, b) => CGoal::Cmp(*op, compile_term(a, vars), compile_term(b, vars)),
        Goal::Unify(a, b) => CGoal::Unify(compile_term(a, vars), compile_term(b, vars)),
    }
}

pub(crate) fn compile_clause(clause: &Clause) -> CompiledClause {
    let mut vars = Vec::new();
    let head = compile_term(&clause.head, &mut vars);
    let body = clause.body.iter().map(|g| compile_goal(g, &mut vars)).collect();
    CompiledClause {
        head,
        body,
        nvars: vars.len(),
    }
}

fn offset(cell: &Cell, base: usize) -> Cell {
    match cell {
        Cell::Var(i) => Cell::Var(base + i),
        Cell::Comp(f, args) => Cell::Comp(f.clone(), args.iter().map(|a| offset(a, base)).collect()),
        other => other.clone(),
    }
}

fn offset_goal(goal: &CGoal, base: usize) -> CGoal {
    match goal {
        CGoal::Call(c) => CGoal::Call(offset(c, base)),
        CGoal::Cmp(op, a, b) => CGoal::Cmp(*op, offset(a, base), offset(b, base)),
        CGoal::Unify(a, b) => CGoal::Unify(offset(a, base), offset(b, base)),
    }
}

/// One resolution step on the path to a solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofStep {
    /// The goal as instantiated by the solution.
    pub goal: Goal,
    /// Index of the program clause used; `None` for built-ins.
    pub clause: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub bindings: Substitution,
    /// Resolution steps in the order they were taken.
    pub proof: Vec<ProofStep>,
}

type GoalList = Option<Rc<GoalNode>>;

struct GoalNode {
    goal: CGoal,
    depth: usize,
    next: GoalList,
}

type ProofList = Option<Rc<ProofNode>>;

struct ProofNode {
    goal: CGoal,
    clause: Option<usize>,
    prev: ProofList,
}

struct Choice<'p> {
    /// Goal list starting with the goal whose alternatives remain.
    goals: Rc<GoalNode>,
    proof: ProofList,
    trail_len: usize,
    store_len: usize,
    candidates: &'p [usize],
    next: usize,
}

/// Lazy enumeration of the answers to a query, in SLD order.
pub struct Solutions<'p> {
    program: &'p Program,
    limits: Limits,
    steps: u64,
    store: Vec<Option<Cell>>,
    trail: Vec<usize>,
    goals: GoalList,
    proof: ProofList,
    choices: Vec<Choice<'p>>,
    query_vars: Vec<Symbol>,
    started: bool,
    finished: bool,
}

/// Solves a conjunctive query against `program`.
pub fn solve<'p>(program: &'p Program, query: &[Goal], limits: Limits) -> Solutions<'p> {
    let mut vars = Vec::new();
    let compiled: Vec<CGoal> = query.iter().map(|g| compile_goal(g, &mut vars)).collect();
    let mut goals: GoalList = None;
    for goal in compiled.into_iter().rev() {
        goals = Some(Rc::new(GoalNode {
            goal,
            depth: 0,
            next: goals,
        }));
    }
    Solutions {
        program,
        limits,
        steps: 0,
        store: vec![None; vars.len()],
        trail: Vec::new(),
        goals,
        proof: None,
        choices: Vec::new(),
        query_vars: vars,
        started: false,
        finished: false,
    }
}

impl<'p> Solutions<'p> {
    /// Resolution steps spent so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn deref(&self, cell: &Cell) -> Cell {
        let mut cur = cell;
        while let Cell::Var(i) = cur {
            match &self.store[*i] {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    fn bind(&mut self, var: usize, value: Cell) -> bool {
        if let Cell::Comp(..) = value {
            if self.occurs(var, &value) {
                return false;
            }
        }
        self.store[var] = Some(value);
        self.trail.push(var);
        true
    }

    fn occurs(&self, var: usize, cell: &Cell) -> bool {
        match self.deref(cell) {
            Cell::Var(i) => i == var,
            Cell::Comp(_, args) => args.iter().any(|a| self.occurs(var, a)),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Cell, b: &Cell) -> bool {
        let a = self.deref(a);
        let b = self.deref(b);
        match (&a, &b) {
            (Cell::Var(x), Cell::Var(y)) if x == y => true,
            (Cell::Var(x), _) => self.bind(*x, b),
            (_, Cell::Var(y)) => self.bind(*y, a),
            (Cell::Atom(x), Cell::Atom(y)) => x == y,
            (Cell::Num(x), Cell::Num(y)) => x == y,
            (Cell::Comp(f, xs), Cell::Comp(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    /// Unifies a runtime goal with a clause head whose variables live at
    /// `base` in the store. Head subterms are only copied when they get bound
    /// to a goal variable.
    fn unify_head(&mut self, goal: &Cell, head: &Cell, base: usize) -> bool {
        match head {
            Cell::Var(i) => {
                let v = base + i;
                match self.store[v].clone() {
                    Some(bound) => self.unify(goal, &bound),
                    None => {
                        let g = self.deref(goal);
                        if let Cell::Var(gv) = g {
                            if gv == v {
                                return true;
                            }
                        }
                        self.bind(v, g)
                    }
                }
            }
            Cell::Atom(_) | Cell::Num(_) => match self.deref(goal) {
                Cell::Var(gv) => self.bind(gv, head.clone()),
                Cell::Atom(x) => matches!(head, Cell::Atom(y) if x == *y),
                Cell::Num(x) => matches!(head, Cell::Num(y) if x == *y),
                Cell::Comp(..) => false,
            },
            Cell::Comp(f, hargs) => match self.deref(goal) {
                Cell::Var(gv) => {
                    let inst = offset(head, base);
                    self.bind(gv, inst)
                }
                Cell::Comp(g, gargs) => {
                    *f == g
                        && hargs.len() == gargs.len()
                        && gargs
                            .iter()
                            .zip(hargs.iter())
                            .all(|(ga, ha)| self.unify_head(ga, ha, base))
                }
                _ => false,
            },
        }
    }

    /// Cheap first-level mismatch test that needs no bindings.
    fn may_match(&self, goal_args: &[Cell], head: &Cell) -> bool {
        let Cell::Comp(_, hargs) = head else {
            return false;
        };
        goal_args.iter().zip(hargs.iter()).all(|(g, h)| {
            match (self.deref(g), h) {
                (Cell::Var(_), _) | (_, Cell::Var(_)) => true,
                (Cell::Atom(x), Cell::Atom(y)) => x == *y,
                (Cell::Num(x), Cell::Num(y)) => x == *y,
                (Cell::Comp(f, xs), Cell::Comp(g, ys)) => f == *g && xs.len() == ys.len(),
                _ => false,
            }
        })
    }

    fn undo_to(&mut self, trail_len: usize, store_len: usize) {
        while self.trail.len() > trail_len {
            let v = self.trail.pop().expect("trail entry");
            if v < self.store.len() {
                self.store[v] = None;
            }
        }
        self.store.truncate(store_len);
    }

    fn spend_step(&mut self, depth: usize) -> Result<(), SolveError> {
        self.steps += 1;
        if self.steps > self.limits.max_steps || depth > self.limits.max_depth {
            return Err(SolveError::BudgetExceeded {
                steps: self.steps,
                depth,
            });
        }
        Ok(())
    }

    fn first_candidate(&self, args: &[Cell], candidates: &[usize], from: usize) -> Option<usize> {
        (from..candidates.len()).find(|&j| self.may_match(args, &self.program.compiled(candidates[j]).head))
    }

    /// Tries clauses of `candidates` starting at `start` for the first goal
    /// of `node`. Returns `Ok(false)` when none applies.
    fn resolve_from(
        &mut self,
        node: Rc<GoalNode>,
        candidates: &'p [usize],
        start: usize,
    ) -> Result<bool, SolveError> {
        let CGoal::Call(goal_cell) = &node.goal else {
            unreachable!("only calls have candidates");
        };
        let Cell::Comp(_, args) = self.deref(goal_cell) else {
            unreachable!("call goals are compound");
        };
        let program = self.program;
        let mut current = self.first_candidate(&args, candidates, start);
        while let Some(i) = current {
            // The next alternative is located before binding anything, so the
            // filter sees the same state the choice point will restore.
            let next = self.first_candidate(&args, candidates, i + 1);
            let idx = candidates[i];
            let clause = program.compiled(idx);
            let trail_len = self.trail.len();
            let store_len = self.store.len();
            self.store.resize(store_len + clause.nvars, None);
            if !self.unify_head(goal_cell, &clause.head, store_len) {
                self.undo_to(trail_len, store_len);
                current = next;
                continue;
            }
            if let Some(next) = next {
                self.choices.push(Choice {
                    goals: node.clone(),
                    proof: self.proof.clone(),
                    trail_len,
                    store_len,
                    candidates,
                    next,
                });
            }
            self.spend_step(node.depth + 1)?;
            let mut rest = node.next.clone();
            for goal in clause.body.iter().rev() {
                rest = Some(Rc::new(GoalNode {
                    goal: offset_goal(goal, store_len),
                    depth: node.depth + 1,
                    next: rest,
                }));
            }
            self.goals = rest;
            self.proof = Some(Rc::new(ProofNode {
                goal: node.goal.clone(),
                clause: Some(idx),
                prev: self.proof.take(),
            }));
            return Ok(true);
        }
        Ok(false)
    }

    /// Restores the most recent choice point and resumes it.
    fn backtrack(&mut self) -> Result<bool, SolveError> {
        while let Some(choice) = self.choices.pop() {
            self.undo_to(choice.trail_len, choice.store_len);
            self.proof = choice.proof;
            if self.resolve_from(choice.goals, choice.candidates, choice.next)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn number_operand(&self, cell: &Cell, goal: &CGoal) -> Result<Number, SolveError> {
        match self.deref(cell) {
            Cell::Num(n) => Ok(n),
            Cell::Var(_) => Err(SolveError::Instantiation {
                goal: self.show_goal(goal).to_string(),
            }),
            other => Err(SolveError::Type {
                goal: self.show_goal(goal).to_string(),
                message: format!("expected a number, found `{}`", self.resolve(&other)),
            }),
        }
    }

    /// Runs until the goal list is empty (a solution) or every alternative
    /// is exhausted.
    fn run(&mut self) -> Result<bool, SolveError> {
        loop {
            let Some(node) = self.goals.clone() else {
                return Ok(true);
            };
            let progressed = match &node.goal {
                CGoal::Call(cell) => match self.deref(cell) {
                    Cell::Comp(name, args) => {
                        let program = self.program;
                        let Some(candidates) = program.lookup(&name, args.len()) else {
                            return Err(SolveError::UnknownPredicate {
                                name: name.to_string(),
                                arity: args.len(),
                            });
                        };
                        self.resolve_from(node.clone(), candidates, 0)?
                    }
                    Cell::Var(_) => {
                        return Err(SolveError::Instantiation {
                            goal: self.show_goal(&node.goal).to_string(),
                        })
                    }
                    other => {
                        return Err(SolveError::Type {
                            goal: self.show_goal(&node.goal).to_string(),
                            message: format!("`{}` is not callable", self.resolve(&other)),
                        })
                    }
                },
                CGoal::Cmp(op, a, b) => {
                    let lhs = self.number_operand(a, &node.goal)?;
                    let rhs = self.number_operand(b, &node.goal)?;
                    self.spend_step(node.depth)?;
                    self.builtin_done(&node, op.holds(lhs, rhs))
                }
                CGoal::Unify(a, b) => {
                    let trail_len = self.trail.len();
                    let ok = self.unify(a, b);
                    if !ok {
                        let store_len = self.store.len();
                        self.undo_to(trail_len, store_len);
                    }
                    self.spend_step(node.depth)?;
                    self.builtin_done(&node, ok)
                }
            };
            if !progressed && !self.backtrack()? {
                return Ok(false);
            }
        }
    }

    fn builtin_done(&mut self, node: &Rc<GoalNode>, ok: bool) -> bool {
        if ok {
            self.goals = node.next.clone();
            self.proof = Some(Rc::new(ProofNode {
                goal: node.goal.clone(),
                clause: None,
                prev: self.proof.take(),
            }));
        }
        ok
    }

    fn var_name(&self, idx: usize) -> Symbol {
        match self.query_vars.get(idx) {
            Some(name) => name.clone(),
            None => Symbol::from(format!("_G{idx}")),
        }
    }

    fn resolve(&self, cell: &Cell) -> Term {
        match self.deref(cell) {
            Cell::Atom(a) => Term::Atom(a),
            Cell::Num(n) => Term::Number(n),
            Cell::Var(i) => Term::Var(self.var_name(i)),
            Cell::Comp(f, args) => Term::Compound(f, args.iter().map(|a| self.resolve(a)).collect()),
        }
    }

    fn show_goal(&self, goal: &CGoal) -> Goal {
        match goal {
            CGoal::Call(c) => Goal::Call(self.resolve(c)),
            CGoal::Cmp(op, a, b) => Goal::Compare(*op, self.resolve(a), self.resolve(b)),
            CGoal::Unify(a, b) => Goal::Unify(self.resolve(a), self.resolve(b)),
        }
    }

    fn current_solution(&self) -> Solution {
        let mut bindings = BTreeMap::new();
        for (idx, name) in self.query_vars.iter().enumerate() {
            let value = self.resolve(&Cell::Var(idx));
            if value != Term::Var(name.clone()) {
                bindings.insert(name.clone(), value);
            }
        }
        let mut proof = Vec::new();
        let mut cur = self.proof.clone();
        while let Some(node) = cur {
            proof.push(ProofStep {
                goal: self.show_goal(&node.goal),
                clause: node.clause,
            });
            cur = node.prev.clone();
        }
        proof.reverse();
        Solution {
            bindings: Substitution::from_resolved(bindings),
            proof,
        }
    }
}

impl Iterator for Solutions<'_> {
    type Item = Result<Solution, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        let outcome = if self.started {
            match self.backtrack() {
                Ok(true) => self.run(),
                other => other,
            }
        } else {
            self.started = true;
            self.run()
        };
        match outcome {
            Ok(true) => Some(Ok(self.current_solution())),
            Ok(false) => {
                self.finished = true;
                None
            }
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn program(text: &str) -> Program {
        Program::parse(text).unwrap()
    }

    fn query(text: &str) -> Vec<Goal> {
        crate::logic::parse_query(text).unwrap()
    }

    fn all(p: &Program, q: &str) -> Vec<Substitution> {
        solve(p, &query(q), Limits::default())
            .map(|r| r.unwrap().bindings)
            .collect()
    }

    #[test]
    fn single_fact_lookup() {
        let p = program("animal(zebra, 3).");
        let sols = all(&p, "animal(A, C)");
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].get("A"), Some(&Term::atom("zebra")));
        assert_eq!(sols[0].get("C"), Some(&Term::int(3)));
    }

    #[test]
    fn existence_rule() {
        let p = program("animal(zebra, 3).\nanimal_exists(A, C) :- animal(A, C), C >= 1.");
        let sols = all(&p, "animal_exists(zebra, C)");
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].get("C"), Some(&Term::int(3)));
        assert_eq!(sols[0].len(), 1);
    }

    #[test]
    fn nontermination_hits_budget() {
        let p = program("loop(X) :- loop(X).");
        let mut it = solve(&p, &query("loop(a)"), Limits::steps(1000));
        assert!(matches!(it.next(), Some(Err(SolveError::BudgetExceeded { .. }))));
        assert!(it.next().is_none());
    }

    #[test]
    fn unknown_predicate() {
        let p = program("animal(zebra, 3).");
        let mut it = solve(&p, &query("animal_bbox(zebra, A, B, C, D)"), Limits::default());
        assert_eq!(
            it.next(),
            Some(Err(SolveError::UnknownPredicate {
                name: "animal_bbox".into(),
                arity: 5
            }))
        );
    }

    #[test]
    fn declared_predicate_just_fails() {
        let mut p = Program::new();
        p.declare("animal", 2);
        assert!(all(&p, "animal(tiger, C)").is_empty());
    }

    #[test]
    fn solutions_follow_clause_order() {
        let p = program(
            "animal_bbox(zebra, 10.0, 20.0, 110.0, 220.0).\n\
             animal_bbox(buffalo, 5.0, 5.0, 50.0, 60.0).\n\
             animal_bbox(zebra, 200.0, 30.0, 300.0, 180.0).",
        );
        let sols = all(&p, "animal_bbox(zebra, X1, Y1, X2, Y2)");
        let xs: Vec<_> = sols.iter().map(|s| s.get("X1").cloned().unwrap()).collect();
        assert_eq!(xs, vec![Term::float(10.0), Term::float(200.0)]);
    }

    #[test]
    fn backtracking_through_joins() {
        let p = program(
            "parent(a, b). parent(b, c). parent(b, d).\n\
             grand(X, Z) :- parent(X, Y), parent(Y, Z).",
        );
        let sols = all(&p, "grand(a, Z)");
        let zs: Vec<_> = sols.iter().map(|s| s.get("Z").cloned().unwrap()).collect();
        assert_eq!(zs, vec![Term::atom("c"), Term::atom("d")]);
    }

    #[test]
    fn comparison_errors() {
        let p = program("n(a).");
        let mut it = solve(&p, &query("X >= 1"), Limits::default());
        assert!(matches!(it.next(), Some(Err(SolveError::Instantiation { .. }))));
        let mut it = solve(&p, &query("n(X), X >= 1"), Limits::default());
        assert!(matches!(it.next(), Some(Err(SolveError::Type { .. }))));
    }

    #[test]
    fn mixed_numeric_comparison() {
        let p = program("v(1). v(2.5). v(4).");
        let sols = all(&p, "v(X), X > 2");
        assert_eq!(sols.len(), 2);
        let sols = all(&p, "v(X), X =:= 1.0");
        assert_eq!(sols.len(), 1);
    }

    #[test]
    fn unify_builtin_and_occurs_check() {
        let p = program("t(f(a)).");
        assert_eq!(all(&p, "t(X), X = f(Y)")[0].get("Y"), Some(&Term::atom("a")));
        assert!(all(&p, "X = f(X), t(X)").is_empty());
    }

    #[test]
    fn head_occurs_check() {
        // f(X, X) against f(Y, g(Y)) has no finite unifier.
        let p = program("same(X, X) :- X = X.");
        assert!(all(&p, "same(Y, g(Y))").is_empty());
    }

    #[test]
    fn proof_records_clauses() {
        let p = program("animal(zebra, 3).\nanimal_exists(A, C) :- animal(A, C), C >= 1.");
        let sol = solve(&p, &query("animal_exists(zebra, C)"), Limits::default())
            .next()
            .unwrap()
            .unwrap();
        let shown: Vec<String> = sol.proof.iter().map(|s| s.goal.to_string()).collect();
        assert_eq!(shown, vec!["animal_exists(zebra, 3)", "animal(zebra, 3)", "3 >= 1"]);
        assert_eq!(
            sol.proof.iter().map(|s| s.clause).collect::<Vec<_>>(),
            vec![Some(1), Some(0), None]
        );
    }

    #[test]
    fn aliased_query_variables() {
        let p = program("pair(a, a). pair(a, b).");
        let sols = all(&p, "pair(X, X)");
        assert_eq!(sols.len(), 1);
        let sols = all(&p, "X = Y, pair(a, Y)");
        assert_eq!(sols.len(), 2);
        assert_eq!(sols[1].get("X"), Some(&Term::atom("b")));
    }
}
