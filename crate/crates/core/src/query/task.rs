use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::encoder::{Embedding, TextEncoder};
use super::QueryError;

/// Rejection threshold on the best cosine score.
pub const DEFAULT_TAU: f64 = 0.05;

/// Built-in paraphrase sets, in the paraphrase file format.
pub const DEFAULT_PARAPHRASES: &str = "\
counting: how many; count; number of; total
existence: is there; are there any; does the image contain; presence of
location: where; locate; find; position of; which part
";

/// The supported question types. Declaration order is lexicographic, which
/// is also the tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskLabel {
    Counting,
    Existence,
    Location,
}

impl TaskLabel {
    pub const ALL: [TaskLabel; 3] = [TaskLabel::Counting, TaskLabel::Existence, TaskLabel::Location];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskLabel::Counting => "counting",
            TaskLabel::Existence => "existence",
            TaskLabel::Location => "location",
        }
    }
}

impl fmt::Display for TaskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown task label `{s}`"))
    }
}

/// Phrases describing each task.
#[derive(Clone, Debug, PartialEq)]
pub struct Paraphrases(BTreeMap<TaskLabel, Vec<String>>);

impl Default for Paraphrases {
    fn default() -> Self {
        Paraphrases::parse(DEFAULT_PARAPHRASES).expect("built-in paraphrases parse")
    }
}

impl Paraphrases {
    /// Parses `label: phrase; phrase; ...` lines. Every label must appear
    /// with at least one nonempty phrase.
    pub fn parse(text: &str) -> Result<Self, QueryError> {
        let mut map: BTreeMap<TaskLabel, Vec<String>> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| QueryError::Paraphrases {
                line: i + 1,
                message,
            };
            let (label, phrases) = line
                .split_once(':')
                .ok_or_else(|| err("expected `label: phrase; phrase`".into()))?;
            let label: TaskLabel = label.trim().parse().map_err(err)?;
            let entry = map.entry(label).or_default();
            for phrase in phrases.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                entry.push(phrase.to_string());
            }
        }
        for label in TaskLabel::ALL {
            if map.get(&label).is_none_or(|p| p.is_empty()) {
                return Err(QueryError::IncompletePrototypes(label));
            }
        }
        Ok(Paraphrases(map))
    }

    pub fn phrases(&self, label: TaskLabel) -> &[String] {
        self.0.get(&label).map_or(&[], Vec::as_slice)
    }
}

/// One embedding per task label.
#[derive(Clone, Debug, PartialEq)]
pub struct Prototypes(BTreeMap<TaskLabel, Embedding>);

impl Prototypes {
    /// Checks that every label is covered by a nonzero vector.
    pub fn new(map: BTreeMap<TaskLabel, Embedding>) -> Result<Self, QueryError> {
        for label in TaskLabel::ALL {
            match map.get(&label) {
                Some(e) if !e.is_zero() => {}
                _ => return Err(QueryError::IncompletePrototypes(label)),
            }
        }
        Ok(Prototypes(map))
    }

    /// Each prototype is the mean embedding of the label's phrases.
    pub fn from_paraphrases(paraphrases: &Paraphrases, encoder: &dyn TextEncoder) -> Result<Self, QueryError> {
        let map = TaskLabel::ALL
            .into_iter()
            .map(|label| {
                let embedded: Vec<Embedding> =
                    paraphrases.phrases(label).iter().map(|p| encoder.embed(p)).collect();
                (label, Embedding::mean(&embedded))
            })
            .collect();
        Prototypes::new(map)
    }

    pub fn get(&self, label: TaskLabel) -> &Embedding {
        &self.0[&label]
    }

    pub fn iter(&self) -> impl Iterator<Item = (TaskLabel, &Embedding)> {
        self.0.iter().map(|(l, e)| (*l, e))
    }
}

/// Which task a question asks for, with the cosine score of every label.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskFlags {
    pub flags: BTreeMap<TaskLabel, bool>,
    pub scores: BTreeMap<TaskLabel, f64>,
}

impl TaskFlags {
    pub fn one_hot(active: TaskLabel, scores: BTreeMap<TaskLabel, f64>) -> Self {
        let flags = TaskLabel::ALL.into_iter().map(|l| (l, l == active)).collect();
        TaskFlags { flags, scores }
    }

    /// The active label when exactly one flag is set.
    pub fn active(&self) -> Option<TaskLabel> {
        let mut on = self.flags.iter().filter(|(_, &v)| v).map(|(l, _)| *l);
        match (on.next(), on.next()) {
            (Some(label), None) => Some(label),
            _ => None,
        }
    }

    pub fn is_set(&self, label: TaskLabel) -> bool {
        self.flags.get(&label).copied().unwrap_or(false)
    }
}

/// Scores `question` against every prototype and picks the best label.
/// Ties go to the lexicographically first label.
pub fn classify_task(
    question: &str,
    encoder: &dyn TextEncoder,
    prototypes: &Prototypes,
    tau: f64,
) -> Result<TaskFlags, QueryError> {
    classify_embedding(&encoder.embed(question), prototypes, tau).map_err(|best| {
        QueryError::Unclassifiable {
            question: question.to_string(),
            best_score: best,
        }
    })
}

/// Argmax over cosine scores. `Err` carries the best score when it falls
/// below `tau`.
pub fn classify_embedding(query: &Embedding, prototypes: &Prototypes, tau: f64) -> Result<TaskFlags, f64> {
    let scores: BTreeMap<TaskLabel, f64> = prototypes.iter().map(|(l, p)| (l, query.cosine(p))).collect();
    let mut best = TaskLabel::Counting;
    for label in TaskLabel::ALL {
        if scores[&label] > scores[&best] {
            best = label;
        }
    }
    let best_score = scores[&best];
    if best_score < tau {
        return Err(best_score);
    }
    Ok(TaskFlags::one_hot(best, scores))
}
