use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use zoolog_core::grounding::{ground, load_rules, SymbolicKb, DEFAULT_RULES};
use zoolog_core::overlay::{render_overlay, ImageRef};
use zoolog_core::query::{QueryParser, TaskLabel, BUILTIN_CLASSES};
use zoolog_core::reasoner::{answer_count, answer_exists, answer_location, ask, Answer};
use zoolog_testkit::detections::{expected_results, random_set};
use zoolog_testkit::questions::random_question;

fn random_kb(seed: u64) -> (zoolog_core::grounding::DetectionSet, SymbolicKb) {
    let set = random_set(&mut StdRng::seed_from_u64(seed), "img");
    let kb = ground(&set, &load_rules(DEFAULT_RULES).unwrap()).unwrap();
    (set, kb)
}

/// Each entry's trace must name a clause printed exactly as in the KB, or
/// the predicate indicator when the goal failed.
fn trace_is_complete(ans: &Answer, kb: &SymbolicKb) -> Result<(), String> {
    let clauses: Vec<String> = kb.program.clauses().iter().map(|c| c.to_string()).collect();
    for class in ans.results.keys() {
        let needle = format!("({class},");
        let steps: Vec<_> = ans.trace.iter().filter(|s| s.goal.contains(&needle)).collect();
        if steps.is_empty() {
            return Err(format!("no trace step for {class}"));
        }
        for s in steps {
            let ok = if s.outcome == "failure" {
                let ind = s.clause.rsplit_once('/').map(|(n, a)| (n.to_string(), a.parse::<usize>().unwrap()));
                ind.is_some_and(|(n, a)| kb.program.is_defined(&n, a))
            } else {
                clauses.contains(&s.clause)
            };
            if !ok {
                return Err(format!("step {s:?} does not reference the KB"));
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tasks_agree(seed in any::<u64>()) {
        let (_, kb) = random_kb(seed);
        let entities: Vec<String> = BUILTIN_CLASSES.iter().map(|s| s.to_string()).collect();
        let count = answer_count(&kb, &entities).unwrap();
        let exists = answer_exists(&kb, &entities).unwrap();
        let loc = answer_location(&kb, &entities).unwrap();
        for e in &entities {
            let n = count.count(e).unwrap();
            let present = exists.present(e).unwrap();
            let boxes = loc.boxes(e).unwrap();
            prop_assert_eq!(present, n >= 1);
            prop_assert_eq!(present, !boxes.is_empty());
            prop_assert_eq!(n as usize, boxes.len());
            prop_assert_eq!(n as usize, kb.count(e));
        }
        for a in [&count, &exists, &loc] {
            prop_assert_eq!(a.results.len(), entities.len());
            trace_is_complete(a, &kb).map_err(TestCaseError::fail)?;
        }
    }

    #[test]
    fn pipeline_matches_detection_list(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (set, kb) = random_kb(seed);
        let parser = QueryParser::builtin();
        let mut classes: Vec<String> = set.detections.iter().map(|d| d.class_label.clone()).collect();
        classes.push(BUILTIN_CLASSES.choose(&mut rng).unwrap().to_string());
        classes.sort();
        classes.dedup();
        let task = *TaskLabel::ALL.choose(&mut rng).unwrap();
        let (question, entities) = random_question(&mut rng, task, &classes);
        let ans = ask(&kb, &parser, &question).unwrap();
        prop_assert_eq!(ans.task, task);
        prop_assert_eq!(&ans.entities, &entities);
        prop_assert_eq!(&ans.results, &expected_results(&set, &entities, task));
        prop_assert_eq!(Answer::from_json(&ans.to_json()).unwrap(), ans.clone());
        if task == TaskLabel::Location {
            let svg = render_overlay(&kb.image, &ans, ImageRef::Link).unwrap();
            let total: usize = entities.iter().map(|e| ans.boxes(e).unwrap().len()).sum();
            prop_assert_eq!(svg.matches("<rect").count(), total);
            for e in &entities {
                for b in ans.boxes(e).unwrap() {
                    let attr = format!("data-box=\"{:?},{:?},{:?},{:?}\"", b.x1, b.y1, b.x2, b.y2);
                    prop_assert!(svg.contains(&attr));
                }
            }
        }
    }
}
