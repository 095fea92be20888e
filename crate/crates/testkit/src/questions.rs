//! Question templates and the fixed parser corpus.

use rand::seq::SliceRandom;
use rand::Rng;
use zoolog_core::query::{TaskLabel, BUILTIN_CLASSES};

/// `{S}` singular, `{A}` singular with article, `{P}` plural; a trailing
/// `2` refers to a second, different class.
pub const COUNTING: &[&str] = &[
    "How many {P} are there?",
    "Count {S} and {S2}",
    "How many {P} are in the image?",
    "Count the {P}",
    "What is the number of {P}?",
    "How many {P} and {P2} are there?",
    "Count {P} in the image",
];

pub const EXISTENCE: &[&str] = &[
    "Is there {A} in the image?",
    "Are there any {P}?",
    "Does the image contain {A}?",
    "Is there {A}?",
    "Are there any {P} or {P2} in the image?",
    "Check the presence of {P}",
];

pub const LOCATION: &[&str] = &[
    "Where is the {S}?",
    "Where are {P} and {P2} in the image?",
    "Locate {P} in the image",
    "Find the {S}",
    "Where are the {P}?",
    "What is the position of the {S}?",
    "Which part of the image has the {S}?",
];

pub fn templates(task: TaskLabel) -> &'static [&'static str] {
    match task {
        TaskLabel::Counting => COUNTING,
        TaskLabel::Existence => EXISTENCE,
        TaskLabel::Location => LOCATION,
    }
}

fn singular(label: &str) -> String {
    label.replace('_', " ")
}

/// English plural written out independently of the library's lexicon.
fn plural(label: &str) -> String {
    let s = singular(label);
    let (head, last) = match s.rsplit_once(' ') {
        Some((h, l)) => (format!("{h} "), l.to_string()),
        None => (String::new(), s.clone()),
    };
    let last = match last.as_str() {
        "wolf" => "wolves".into(),
        "ox" => "oxen".into(),
        "goose" => "geese".into(),
        "deer" | "sheep" => last,
        "buffalo" => "buffaloes".into(),
        l if l.ends_with('x') || l.ends_with('s') || l.ends_with("ch") || l.ends_with("sh") => format!("{l}es"),
        l => format!("{l}s"),
    };
    format!("{head}{last}")
}

fn with_article(label: &str) -> String {
    let s = singular(label);
    let article = if s.starts_with(['a', 'e', 'i', 'o', 'u']) { "an" } else { "a" };
    format!("{article} {s}")
}

/// Fills `template` with `first` and `second` and returns the question
/// together with the labels it mentions, in order.
pub fn render(template: &str, first: &str, second: &str) -> (String, Vec<String>) {
    let q = template
        .replace("{S2}", &singular(second))
        .replace("{P2}", &plural(second))
        .replace("{S}", &singular(first))
        .replace("{A}", &with_article(first))
        .replace("{P}", &plural(first));
    let mut entities = vec![first.to_string()];
    if template.contains('2') {
        entities.push(second.to_string());
    }
    (q, entities)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusItem {
    pub question: String,
    pub task: TaskLabel,
    pub entities: Vec<String>,
}

pub const CORPUS_PER_TASK: usize = 20;

/// Sixty questions, twenty per task, cycling through each task's templates
/// and stepping through the built-in classes.
pub fn corpus() -> Vec<CorpusItem> {
    let classes = BUILTIN_CLASSES;
    let mut out = Vec::new();
    let mut k = 0usize;
    for task in TaskLabel::ALL {
        let ts = templates(task);
        for i in 0..CORPUS_PER_TASK {
            let first = classes[(k * 7) % classes.len()];
            let second = classes[(k * 7 + 11) % classes.len()];
            k += 1;
            let (question, entities) = render(ts[i % ts.len()], first, second);
            out.push(CorpusItem {
                question,
                task,
                entities,
            });
        }
    }
    out
}

/// A random question for `task` about classes drawn from `classes`.
pub fn random_question(rng: &mut impl Rng, task: TaskLabel, classes: &[String]) -> (String, Vec<String>) {
    let template = templates(task).choose(rng).unwrap();
    let first = classes.choose(rng).unwrap();
    let others: Vec<&String> = classes.iter().filter(|c| *c != first).collect();
    match others.choose(rng) {
        Some(second) => render(template, first, second),
        None => render(templates(task)[0], first, first),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering() {
        assert_eq!(
            render("Count {S} and {S2}", "zebra", "buffalo"),
            ("Count zebra and buffalo".to_string(), vec!["zebra".to_string(), "buffalo".to_string()])
        );
        assert_eq!(render("Is there {A}?", "elephant", "x").0, "Is there an elephant?");
        assert_eq!(render("Where are the {P}?", "polar_bear", "x").0, "Where are the polar bears?");
        assert_eq!(render("Locate {P}", "ox", "x").0, "Locate oxen");
    }

    #[test]
    fn corpus_shape() {
        let c = corpus();
        assert_eq!(c.len(), 60);
        for task in TaskLabel::ALL {
            assert_eq!(c.iter().filter(|i| i.task == task).count(), CORPUS_PER_TASK);
        }
        assert!(c.iter().all(|i| i.entities.iter().all(|e| BUILTIN_CLASSES.contains(&e.as_str()))));
        assert!(c.iter().all(|i| i.entities.len() < 2 || i.entities[0] != i.entities[1]));
    }
}
