use std::collections::BTreeMap;
use std::sync::Arc;

use crate::logic::{Clause, Program, Symbol, Term};

use super::{DetectionSet, GroundingError, ImageMeta, ANIMAL, ANIMAL_BBOX, ANIMAL_EXISTS};

/// Per-image knowledge base: the loaded rules plus the image's facts.
#[derive(Clone, Debug)]
pub struct SymbolicKb {
    pub image: ImageMeta,
    pub program: Arc<Program>,
    pub class_counts: BTreeMap<String, usize>,
}

impl SymbolicKb {
    pub fn count(&self, class: &str) -> usize {
        self.class_counts.get(class).copied().unwrap_or(0)
    }
}

/// Number of detections per class. Classes without detections are absent.
pub fn count_classes(d: &DetectionSet) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for det in &d.detections {
        *counts.entry(det.class_label.clone()).or_insert(0) += 1;
    }
    counts
}

/// Parses a rule file and checks it defines the rules the reasoner calls.
pub fn load_rules(text: &str) -> Result<Program, GroundingError> {
    let rules = Program::parse(text)?;
    if !rules.is_defined(ANIMAL_EXISTS, 2) {
        return Err(GroundingError::MissingRule(format!("{ANIMAL_EXISTS}/2")));
    }
    Ok(rules)
}

/// Builds the knowledge base of one image: `rules`, then one
/// `animal(Class, Count)` fact per present class in first-occurrence order,
/// then one `animal_bbox` fact per detection in file order.
pub fn ground(d: &DetectionSet, rules: &Program) -> Result<SymbolicKb, GroundingError> {
    let counts = count_classes(d);
    let mut program = rules.clone();
    program.declare(ANIMAL, 2);
    program.declare(ANIMAL_BBOX, 5);

    let mut order: Vec<&str> = Vec::new();
    for det in &d.detections {
        if !order.contains(&det.class_label.as_str()) {
            order.push(&det.class_label);
        }
    }
    let animal = Symbol::from(ANIMAL);
    for class in order {
        program.assert_fact(Clause::fact(Term::Compound(
            animal.clone(),
            vec![Term::atom(class), Term::int(counts[class] as i64)],
        )))?;
    }

    let bbox = Symbol::from(ANIMAL_BBOX);
    for det in &d.detections {
        let b = det.bbox;
        program.assert_fact(Clause::fact(Term::Compound(
            bbox.clone(),
            vec![
                Term::atom(&det.class_label),
                Term::float(b.x1),
                Term::float(b.y1),
                Term::float(b.x2),
                Term::float(b.y2),
            ],
        )))?;
    }

    Ok(SymbolicKb {
        image: d.image.clone(),
        program: Arc::new(program),
        class_counts: counts,
    })
}
