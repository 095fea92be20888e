use std::collections::HashSet;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use zoolog_core::logic::{parse_program, print_program, solve, Goal, Limits};
use zoolog_testkit::bottom_up::{answers, ground_query, least_model};
use zoolog_testkit::programs::random_program;

fn check_program(seed: u64) -> Result<(), TestCaseError> {
    let rp = random_program(&mut StdRng::seed_from_u64(seed));
    let model = least_model(&rp.program);
    for q in &rp.queries {
        let expected = answers(&model, q);
        let mut got = HashSet::new();
        for sol in solve(&rp.program, &[Goal::Call(q.clone())], Limits::steps(5_000_000)) {
            let sol = sol.map_err(|e| TestCaseError::fail(format!("{e}\n{}", rp.source)))?;
            let fact = ground_query(q, &sol.bindings);
            prop_assert!(expected.contains(&fact), "unsound answer {fact:?} to {q}\n{}", rp.source);
            got.insert(fact);
        }
        prop_assert_eq!(&got, &expected, "query {} on\n{}", q, rp.source);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solve_matches_bottom_up(seed in any::<u64>()) {
        check_program(seed)?;
    }

    #[test]
    fn print_parse_identity(seed in any::<u64>()) {
        let rp = random_program(&mut StdRng::seed_from_u64(seed));
        let printed = print_program(&rp.program);
        let reparsed = parse_program(&printed).unwrap();
        prop_assert_eq!(&reparsed, &rp.program);
        prop_assert_eq!(print_program(&reparsed), printed);
    }
}

#[test]
fn seeded_sweep() {
    let mut derived = 0;
    for seed in 0..200 {
        check_program(seed).unwrap();
        let rp = random_program(&mut StdRng::seed_from_u64(seed));
        let facts: HashSet<_> = rp.program.clauses().iter().filter(|c| c.is_fact()).map(|c| c.head.clone()).collect();
        derived += least_model(&rp.program).len() - facts.len();
    }
    // The sweep has to exercise rules, not just fact lookup.
    assert!(derived > 500, "only {derived} rule-derived facts");
}
