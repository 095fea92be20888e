//! Detector output to symbolic facts.
//!
//! Detections are read from files written by an external detector, filtered
//! by confidence, and asserted as `animal(Class, Count)` and
//! `animal_bbox(Class, X1, Y1, X2, Y2)` facts next to the loaded rules.

mod ground;
mod load;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::LogicError;

pub use ground::{count_classes, ground, load_rules, SymbolicKb};
pub use load::{load_detections, load_json, load_yolo, parse_names, DetectionFormat, YoloContext};

pub const ANIMAL: &str = "animal";
pub const ANIMAL_BBOX: &str = "animal_bbox";
pub const ANIMAL_EXISTS: &str = "animal_exists";

/// Confidence threshold applied when none is configured.
pub const DEFAULT_THRESHOLD: f64 = 0.25;

/// Boxes may overshoot the image by this many pixels and are clamped back.
pub const CLAMP_TOLERANCE_PX: f64 = 2.0;

/// Rule file used when none is configured.
pub const DEFAULT_RULES: &str = "\
% A class is present when at least one instance was detected.
animal_exists(A, C) :- animal(A, C), C >= 1.
";

#[derive(Debug, Error)]
pub enum GroundingError {
    #[error("{}", fmt_format(.line, .message))]
    Format { line: Option<usize>, message: String },
    #[error("line {line}: unknown class id {id}")]
    UnknownClassId { line: usize, id: u32 },
    #[error("image `{image}`: {message}")]
    Geometry { image: String, message: String },
    #[error("confidence threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("rule file does not define {0}")]
    MissingRule(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_format(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(line) => format!("format error at line {line}: {message}"),
        None => format!("format error: {message}"),
    }
}

impl GroundingError {
    pub(crate) fn format(line: Option<usize>, message: impl Into<String>) -> Self {
        GroundingError::Format {
            line,
            message: message.into(),
        }
    }
}

/// Axis-aligned box in absolute pixels, top-left origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        BBox { x1, y1, x2, y2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    /// Clamps a box that overshoots the image by at most
    /// [`CLAMP_TOLERANCE_PX`], and rejects anything worse or degenerate.
    pub fn clamped(self, width: u32, height: u32) -> Result<BBox, String> {
        let coords = self.to_array();
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(format!("box {coords:?} has non-finite coordinates"));
        }
        let (w, h) = (f64::from(width), f64::from(height));
        let t = CLAMP_TOLERANCE_PX;
        if self.x1 < -t || self.y1 < -t || self.x2 > w + t || self.y2 > h + t {
            return Err(format!("box {coords:?} lies outside the {width}x{height} image"));
        }
        let b = BBox {
            x1: self.x1.clamp(0.0, w),
            y1: self.y1.clamp(0.0, h),
            x2: self.x2.clamp(0.0, w),
            y2: self.y2.clamp(0.0, h),
        };
        if b.x1 >= b.x2 || b.y1 >= b.y2 {
            return Err(format!("box {coords:?} is empty or inverted"));
        }
        Ok(b)
    }
}

impl From<[f64; 4]> for BBox {
    fn from(a: [f64; 4]) -> Self {
        BBox::new(a[0], a[1], a[2], a[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        b.to_array()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub class_label: String,
    /// Kept for diagnostics only; never asserted into the knowledge base.
    pub confidence: f64,
    pub bbox: BBox,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageMeta {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub path: Option<PathBuf>,
}

impl ImageMeta {
    pub fn new(id: impl Into<String>, width: u32, height: u32) -> Self {
        ImageMeta {
            id: id.into(),
            width,
            height,
            path: None,
        }
    }

    pub fn with_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.path = Some(path.into());
        self
    }
}

/// Detections of one image, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionSet {
    pub image: ImageMeta,
    pub detections: Vec<Detection>,
}

impl DetectionSet {
    pub fn new(image: ImageMeta) -> Self {
        DetectionSet {
            image,
            detections: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }
}

/// Canonical atom spelling of a class label: trimmed, lowercased, with runs
/// of spaces and hyphens turned into one underscore.
///
/// ```
/// assert_eq!(zoolog_core::grounding::canonical_label(" Polar bear"), "polar_bear");
/// ```
pub fn canonical_label(raw: &str) -> String {
    raw.trim()
        .to_lowercase()
        .split(|c: char| c.is_whitespace() || c == '-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

/// Canonicalizes `raw` and checks that the result is a valid atom.
pub fn checked_label(raw: &str) -> Option<String> {
    let label = canonical_label(raw);
    crate::logic::is_atom_name(&label).then_some(label)
}

pub(crate) fn check_threshold(threshold: f64) -> Result<(), GroundingError> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(GroundingError::InvalidThreshold(threshold))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_normalization() {
        assert_eq!(canonical_label("Polar bear"), "polar_bear");
        assert_eq!(canonical_label("  Brown-Bear "), "brown_bear");
        assert_eq!(canonical_label("zebra"), "zebra");
        assert_eq!(checked_label("Zèbre"), None);
        assert_eq!(checked_label("3d"), None);
    }

    #[test]
    fn clamp_within_tolerance() {
        let b = BBox::new(-1.5, 0.0, 641.0, 480.0).clamped(640, 480).unwrap();
        assert_eq!(b, BBox::new(0.0, 0.0, 640.0, 480.0));
    }

    #[test]
    fn reject_outside_tolerance() {
        assert!(BBox::new(-3.0, 0.0, 10.0, 10.0).clamped(640, 480).is_err());
        assert!(BBox::new(0.0, 0.0, 10.0, 483.0).clamped(640, 480).is_err());
    }

    #[test]
    fn reject_degenerate() {
        assert!(BBox::new(10.0, 0.0, 10.0, 10.0).clamped(640, 480).is_err());
        assert!(BBox::new(20.0, 0.0, 10.0, 10.0).clamped(640, 480).is_err());
        // Clamping can collapse a box that sat entirely in the margin.
        assert!(BBox::new(640.5, 0.0, 641.0, 10.0).clamped(640, 480).is_err());
    }
}
