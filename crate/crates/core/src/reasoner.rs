//! Answers parsed questions against a grounded knowledge base.
//!
//! Every per-class result comes with trace steps naming the goal that was
//! run, how it ended, and the clause it resolved against.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::grounding::{BBox, SymbolicKb, ANIMAL, ANIMAL_BBOX, ANIMAL_EXISTS};
use crate::logic::{solve, Goal, Limits, Number, Program, Solution, SolveError, Term};
use crate::query::{ParsedQuery, QueryError, QueryParser, TaskLabel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReasonError {
    #[error("no known animal mentioned in `{question}`")]
    NoEntities { question: String },
    #[error("parsed query has no single active task")]
    InternalTaskError,
    #[error("`{goal}` bound a non-numeric value: {value}")]
    UnexpectedBinding { goal: String, value: String },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Failure anywhere between the question text and the answer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AskError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Reason(#[from] ReasonError),
}

/// Result for one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Count(u64),
    Present(bool),
    Boxes(Vec<BBox>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub goal: String,
    pub outcome: String,
    pub clause: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub task: TaskLabel,
    pub entities: Vec<String>,
    pub results: BTreeMap<String, Payload>,
    #[serde(default)]
    pub trace: Vec<TraceStep>,
}

impl Serialize for TaskLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TaskLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Answer {
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("answers serialize")
    }

    /// Compact JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }

    pub fn from_json(text: &str) -> Result<Answer, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Same task, entities and results; traces are not compared.
    pub fn same_result(&self, other: &Answer) -> bool {
        self.task == other.task && self.entities == other.entities && self.results == other.results
    }

    pub fn count(&self, class: &str) -> Option<u64> {
        match self.results.get(class)? {
            Payload::Count(n) => Some(*n),
            _ => None,
        }
    }

    pub fn present(&self, class: &str) -> Option<bool> {
        match self.results.get(class)? {
            Payload::Present(p) => Some(*p),
            _ => None,
        }
    }

    pub fn boxes(&self, class: &str) -> Option<&[BBox]> {
        match self.results.get(class)? {
            Payload::Boxes(b) => Some(b),
            _ => None,
        }
    }
}

struct Run<'a> {
    program: &'a Program,
    limits: Limits,
    trace: Vec<TraceStep>,
}

impl<'a> Run<'a> {
    fn new(kb: &'a SymbolicKb) -> Self {
        Run {
            program: &kb.program,
            limits: Limits::default(),
            trace: Vec::new(),
        }
    }

    /// Collects up to `max` solutions of `goal` and records them.
    fn query(&mut self, goal: Term, max: usize) -> Result<Vec<Solution>, ReasonError> {
        let goal = Goal::Call(goal);
        let mut found = Vec::new();
        for sol in solve(self.program, std::slice::from_ref(&goal), self.limits).take(max) {
            found.push(sol?);
        }
        let printed = goal.to_string();
        if found.is_empty() {
            let (name, arity) = goal_indicator(&goal);
            self.trace.push(TraceStep {
                goal: printed.clone(),
                outcome: "failure".into(),
                clause: format!("{name}/{arity}"),
            });
        }
        for sol in &found {
            self.record(&printed, sol);
        }
        Ok(found)
    }

    fn record(&mut self, printed: &str, sol: &Solution) {
        let mut steps = sol.proof.iter();
        if let Some(first) = steps.next() {
            self.trace.push(TraceStep {
                goal: printed.to_string(),
                outcome: format!("success {}", sol.bindings),
                clause: self.clause_text(first.clause),
            });
        }
        for step in steps {
            self.trace.push(TraceStep {
                goal: step.goal.to_string(),
                outcome: "success".into(),
                clause: self.clause_text(step.clause),
            });
        }
    }

    fn clause_text(&self, index: Option<usize>) -> String {
        match index.and_then(|i| self.program.clause(i)) {
            Some(c) => c.to_string(),
            None => "builtin".into(),
        }
    }
}

fn goal_indicator(goal: &Goal) -> (String, usize) {
    match goal {
        Goal::Call(t) => t
            .indicator()
            .map(|(n, a)| (n.to_string(), a))
            .unwrap_or_else(|| (t.to_string(), 0)),
        other => (other.to_string(), 0),
    }
}

fn call(name: &str, args: Vec<Term>) -> Term {
    Term::compound(name, args)
}

fn require_entities(entities: &[String]) -> Result<(), ReasonError> {
    if entities.is_empty() {
        return Err(ReasonError::NoEntities {
            question: String::new(),
        });
    }
    Ok(())
}

fn finish(task: TaskLabel, entities: &[String], results: BTreeMap<String, Payload>, run: Run) -> Answer {
    Answer {
        task,
        entities: entities.to_vec(),
        results,
        trace: run.trace,
    }
}

/// `animal(a, C)` per entity; 0 when there is no solution.
pub fn answer_count(kb: &SymbolicKb, entities: &[String]) -> Result<Answer, ReasonError> {
    require_entities(entities)?;
    let mut run = Run::new(kb);
    let mut results = BTreeMap::new();
    for a in entities {
        let goal = call(ANIMAL, vec![Term::atom(a), Term::var("C")]);
        let printed = goal.to_string();
        let sols = run.query(goal, 1)?;
        let count = match sols.first().and_then(|s| s.bindings.get("C")) {
            None => 0,
            Some(Term::Number(Number::Int(n))) if *n >= 0 => *n as u64,
            Some(other) => {
                return Err(ReasonError::UnexpectedBinding {
                    goal: printed,
                    value: other.to_string(),
                })
            }
        };
        results.insert(a.clone(), Payload::Count(count));
    }
    Ok(finish(TaskLabel::Counting, entities, results, run))
}

/// `animal_exists(a, C)` per entity; present iff it has a solution.
pub fn answer_exists(kb: &SymbolicKb, entities: &[String]) -> Result<Answer, ReasonError> {
    require_entities(entities)?;
    let mut run = Run::new(kb);
    let mut results = BTreeMap::new();
    for a in entities {
        let goal = call(ANIMAL_EXISTS, vec![Term::atom(a), Term::var("C")]);
        let present = !run.query(goal, 1)?.is_empty();
        results.insert(a.clone(), Payload::Present(present));
    }
    Ok(finish(TaskLabel::Existence, entities, results, run))
}

/// Every `animal_bbox(a, X1, Y1, X2, Y2)` solution per entity, in the
/// order the facts were asserted.
pub fn answer_location(kb: &SymbolicKb, entities: &[String]) -> Result<Answer, ReasonError> {
    require_entities(entities)?;
    let mut run = Run::new(kb);
    let mut results = BTreeMap::new();
    let coords = ["X1", "Y1", "X2", "Y2"];
    for a in entities {
        let mut args = vec![Term::atom(a)];
        args.extend(coords.iter().map(|v| Term::var(v)));
        let goal = call(ANIMAL_BBOX, args);
        let printed = goal.to_string();
        let mut boxes = Vec::new();
        for sol in run.query(goal, usize::MAX)? {
            let mut xs = [0.0; 4];
            for (x, v) in xs.iter_mut().zip(coords) {
                *x = match sol.bindings.get(v) {
                    Some(Term::Number(n)) => n.as_f64(),
                    other => {
                        return Err(ReasonError::UnexpectedBinding {
                            goal: printed,
                            value: other.map_or("unbound".into(), |t| t.to_string()),
                        })
                    }
                };
            }
            boxes.push(BBox::from(xs));
        }
        results.insert(a.clone(), Payload::Boxes(boxes));
    }
    Ok(finish(TaskLabel::Location, entities, results, run))
}

/// Runs the operation selected by the query's single active task flag.
pub fn answer(kb: &SymbolicKb, pq: &ParsedQuery) -> Result<Answer, ReasonError> {
    let task = pq.task.active().ok_or(ReasonError::InternalTaskError)?;
    if pq.entities.is_empty() {
        return Err(ReasonError::NoEntities {
            question: pq.raw.clone(),
        });
    }
    match task {
        TaskLabel::Counting => answer_count(kb, &pq.entities),
        TaskLabel::Existence => answer_exists(kb, &pq.entities),
        TaskLabel::Location => answer_location(kb, &pq.entities),
    }
}

/// Parses `question` and answers it over `kb`.
pub fn ask(kb: &SymbolicKb, parser: &QueryParser, question: &str) -> Result<Answer, AskError> {
    let pq = parser.parse(question)?;
    Ok(answer(kb, &pq)?)
}

/// Structured error body shared by the CLI and the HTTP service.
pub fn error_body(code: &str, message: &str, question: &str) -> Value {
    let mut m = Map::new();
    m.insert("code".into(), json!(code));
    m.insert("message".into(), json!(message));
    m.insert("question".into(), json!(question));
    Value::Object(m)
}

impl AskError {
    pub fn code(&self) -> &'static str {
        match self {
            AskError::Query(QueryError::Unclassifiable { .. }) => "UnclassifiableQuery",
            AskError::Query(_) => "QueryConfigError",
            AskError::Reason(ReasonError::NoEntities { .. }) => "NoEntities",
            AskError::Reason(ReasonError::InternalTaskError) => "InternalTaskError",
            AskError::Reason(_) => "ReasoningError",
        }
    }

    /// Whether the question itself could not be understood.
    pub fn is_parse_failure(&self) -> bool {
        matches!(
            self,
            AskError::Query(QueryError::Unclassifiable { .. }) | AskError::Reason(ReasonError::NoEntities { .. })
        )
    }
}
