//! Random detection files and the answers they should produce.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;
use zoolog_core::grounding::{BBox, Detection, DetectionSet, ImageMeta};
use zoolog_core::query::{TaskLabel, BUILTIN_CLASSES};
use zoolog_core::reasoner::Payload;

pub const MAX_DETECTIONS: usize = 50;
pub const MAX_CLASSES: usize = 10;

/// A detection record as written to a file, before any filtering.
#[derive(Clone, Debug, PartialEq)]
pub struct RawDetection {
    pub class: String,
    pub confidence: f64,
    pub bbox: [f64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawImage {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub detections: Vec<RawDetection>,
}

fn coord(rng: &mut impl Rng, limit: u32) -> (f64, f64) {
    let limit = f64::from(limit);
    let a = (rng.gen_range(0.0..limit - 1.0) * 100.0).round() / 100.0;
    let b = (rng.gen_range(a + 0.5..=limit) * 100.0).round() / 100.0;
    (a, b.min(limit).max(a + 0.01))
}

/// Picks up to `max_classes` labels from the built-in vocabulary.
pub fn random_classes(rng: &mut impl Rng, max_classes: usize) -> Vec<String> {
    let k = rng.gen_range(1..=max_classes);
    BUILTIN_CLASSES
        .choose_multiple(rng, k)
        .map(|s| s.to_string())
        .collect()
}

pub fn random_image(rng: &mut impl Rng, id: &str, classes: &[String], max_detections: usize) -> RawImage {
    let width = rng.gen_range(32..=1920);
    let height = rng.gen_range(32..=1080);
    let detections = (0..rng.gen_range(0..=max_detections))
        .map(|_| {
            let (x1, x2) = coord(rng, width);
            let (y1, y2) = coord(rng, height);
            RawDetection {
                class: classes.choose(rng).unwrap().clone(),
                confidence: (rng.gen_range(0.0..=1.0f64) * 1000.0).round() / 1000.0,
                bbox: [x1, y1, x2, y2],
            }
        })
        .collect();
    RawImage {
        id: id.to_string(),
        width,
        height,
        detections,
    }
}

/// The JSON detection file describing `images`.
pub fn to_json(images: &[RawImage]) -> String {
    let images: Vec<_> = images
        .iter()
        .map(|img| {
            json!({
                "id": img.id,
                "width": img.width,
                "height": img.height,
                "detections": img.detections.iter().map(|d| json!({
                    "class": d.class,
                    "confidence": d.confidence,
                    "bbox": d.bbox,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "images": images }).to_string()
}

/// Detections that survive `threshold`, as a set ready for grounding.
pub fn retained(img: &RawImage, threshold: f64) -> DetectionSet {
    DetectionSet {
        image: ImageMeta::new(img.id.clone(), img.width, img.height),
        detections: img
            .detections
            .iter()
            .filter(|d| d.confidence >= threshold)
            .map(|d| Detection {
                class_label: d.class.clone(),
                confidence: d.confidence,
                bbox: BBox::from(d.bbox),
            })
            .collect(),
    }
}

/// Per-class sum of indicators over the raw records: for each class,
/// count the records with that label and confidence at or above
/// `threshold`. Classes summing to zero are left out.
pub fn count_oracle(img: &RawImage, threshold: f64) -> BTreeMap<String, usize> {
    let mut labels: Vec<&str> = img.detections.iter().map(|d| d.class.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    labels
        .into_iter()
        .filter_map(|c| {
            let n: usize = img
                .detections
                .iter()
                .map(|d| usize::from(d.class == c && d.confidence >= threshold))
                .sum();
            (n > 0).then(|| (c.to_string(), n))
        })
        .collect()
}

/// What each task should return for `entities`, read straight off the
/// detection list.
pub fn expected_results(set: &DetectionSet, entities: &[String], task: TaskLabel) -> BTreeMap<String, Payload> {
    entities
        .iter()
        .map(|e| {
            let boxes: Vec<BBox> = set
                .detections
                .iter()
                .filter(|d| d.class_label == *e)
                .map(|d| d.bbox)
                .collect();
            let payload = match task {
                TaskLabel::Counting => Payload::Count(boxes.len() as u64),
                TaskLabel::Existence => Payload::Present(!boxes.is_empty()),
                TaskLabel::Location => Payload::Boxes(boxes),
            };
            (e.clone(), payload)
        })
        .collect()
}

/// A detection set drawn directly, with every detection retained.
pub fn random_set(rng: &mut impl Rng, id: &str) -> DetectionSet {
    let classes = random_classes(rng, MAX_CLASSES);
    retained(&random_image(rng, id, &classes, MAX_DETECTIONS), 0.0)
}
