use proptest::prelude::*;
use zoolog_core::query::{Lexicon, QueryParser, TaskLabel, BUILTIN_CLASSES};
use zoolog_testkit::questions::{corpus, render, templates};

#[test]
fn corpus_is_fully_recovered() {
    let parser = QueryParser::builtin();
    let items = corpus();
    let mut failures = Vec::new();
    for item in &items {
        match parser.parse(&item.question) {
            Ok(pq) if pq.task.active() == Some(item.task) && pq.entities == item.entities => {}
            other => failures.push(format!("{} -> {other:?}", item.question)),
        }
    }
    assert!(failures.is_empty(), "{} of {} wrong:\n{}", failures.len(), items.len(), failures.join("\n"));
}

/// Every template with every pair of distinct built-in classes.
#[test]
fn all_templates_all_classes() {
    let parser = QueryParser::builtin();
    let mut wrong = Vec::new();
    for task in TaskLabel::ALL {
        for t in templates(task) {
            for (i, a) in BUILTIN_CLASSES.iter().enumerate() {
                let b = BUILTIN_CLASSES[(i + 5) % BUILTIN_CLASSES.len()];
                let (q, entities) = render(t, a, b);
                match parser.parse(&q) {
                    Ok(pq) if pq.task.active() == Some(task) && pq.entities == entities => {}
                    other => wrong.push(format!("{q} -> {other:?}")),
                }
            }
        }
    }
    assert!(wrong.is_empty(), "{}", wrong.join("\n"));
}

#[test]
fn reference_phrasings() {
    let parser = QueryParser::builtin();
    let cases = [
        ("How many tigers are there?", TaskLabel::Counting, vec!["tiger"]),
        ("Count zebra and buffalo", TaskLabel::Counting, vec!["zebra", "buffalo"]),
        ("Locate zebras in the image", TaskLabel::Location, vec!["zebra"]),
        ("Where are zebras and cows in the image?", TaskLabel::Location, vec!["zebra", "cow"]),
        ("Is there a rhinoceros in the image?", TaskLabel::Existence, vec!["rhino"]),
    ];
    for (q, task, entities) in cases {
        let pq = parser.parse(q).unwrap();
        assert_eq!(pq.task.active(), Some(task), "{q}");
        assert_eq!(pq.entities, entities, "{q}");
    }
}

#[test]
fn off_topic_questions_are_rejected() {
    let parser = QueryParser::builtin();
    for q in ["what is the weather", "", "Hello there", "tell me a joke"] {
        assert!(parser.classify(q).is_err(), "{q}");
    }
}

proptest! {
    #[test]
    fn extraction_is_idempotent_on_labels(idx in proptest::collection::vec(0..BUILTIN_CLASSES.len(), 1..5)) {
        let lex = Lexicon::builtin();
        let labels: Vec<&str> = idx.iter().map(|&i| BUILTIN_CLASSES[i]).collect();
        let text = labels.join(" and ");
        let mut expected: Vec<String> = Vec::new();
        for l in &labels {
            if !expected.iter().any(|e| e == l) {
                expected.push(l.to_string());
            }
        }
        prop_assert_eq!(lex.extract(&text), expected);
    }

    #[test]
    fn task_flags_are_one_hot(q in "[a-z ]{0,40}") {
        if let Ok(flags) = QueryParser::builtin().classify(&q) {
            prop_assert_eq!(flags.flags.values().filter(|v| **v).count(), 1);
        }
    }
}
