use std::collections::HashSet;
use std::io::Read;
use std::str::FromStr;

use serde::Deserialize;

use super::{check_threshold, checked_label, BBox, Detection, DetectionSet, GroundingError, ImageMeta};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectionFormat {
    /// One JSON document describing every image.
    Json,
    /// One YOLO text file per image plus a class-names file.
    Yolo,
}

impl FromStr for DetectionFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(DetectionFormat::Json),
            "yolo" | "yolo_txt" => Ok(DetectionFormat::Yolo),
            other => Err(format!("unknown detection format `{other}` (expected json or yolo)")),
        }
    }
}

/// What a YOLO text file needs besides its lines: the image it belongs to
/// (for denormalization) and the id-to-label table.
#[derive(Clone, Debug)]
pub struct YoloContext<'a> {
    pub meta: ImageMeta,
    pub names: &'a [String],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionFile {
    images: Vec<ImageRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageRecord {
    id: String,
    width: u32,
    height: u32,
    #[serde(default)]
    path: Option<String>,
    detections: Vec<DetectionRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionRecord {
    class: String,
    confidence: f64,
    bbox: [f64; 4],
}

/// Reads detections in either supported format. JSON yields one set per
/// image record; YOLO yields exactly one set and requires `yolo`.
pub fn load_detections(
    source: impl Read,
    format: DetectionFormat,
    yolo: Option<YoloContext<'_>>,
    threshold: f64,
) -> Result<Vec<DetectionSet>, GroundingError> {
    match format {
        DetectionFormat::Json => load_json(source, threshold),
        DetectionFormat::Yolo => {
            let ctx = yolo.ok_or_else(|| {
                GroundingError::format(None, "YOLO input needs image metadata and class names")
            })?;
            load_yolo(source, ctx.meta, ctx.names, threshold).map(|d| vec![d])
        }
    }
}

pub fn load_json(mut source: impl Read, threshold: f64) -> Result<Vec<DetectionSet>, GroundingError> {
    check_threshold(threshold)?;
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let file: DetectionFile = serde_json::from_str(&text)
        .map_err(|e| GroundingError::format(Some(e.line()), e.to_string()))?;

    let mut seen = HashSet::new();
    let mut sets = Vec::with_capacity(file.images.len());
    for record in file.images {
        if !seen.insert(record.id.clone()) {
            return Err(GroundingError::format(None, format!("duplicate image id `{}`", record.id)));
        }
        if record.width == 0 || record.height == 0 {
            return Err(GroundingError::format(
                None,
                format!("image `{}` has zero width or height", record.id),
            ));
        }
        let mut meta = ImageMeta::new(record.id, record.width, record.height);
        meta.path = record.path.map(Into::into);
        let mut set = DetectionSet::new(meta);
        for (k, det) in record.detections.into_iter().enumerate() {
            let at = || format!("image `{}`, detection {}", set.image.id, k + 1);
            if !(0.0..=1.0).contains(&det.confidence) {
                return Err(GroundingError::format(
                    None,
                    format!("{}: confidence {} outside [0, 1]", at(), det.confidence),
                ));
            }
            let label = checked_label(&det.class).ok_or_else(|| {
                GroundingError::format(None, format!("{}: invalid class label `{}`", at(), det.class))
            })?;
            if det.confidence < threshold {
                continue;
            }
            let bbox = BBox::from(det.bbox)
                .clamped(set.image.width, set.image.height)
                .map_err(|message| GroundingError::Geometry {
                    image: set.image.id.clone(),
                    message: format!("detection {}: {message}", k + 1),
                })?;
            set.detections.push(Detection {
                class_label: label,
                confidence: det.confidence,
                bbox,
            });
        }
        sets.push(set);
    }
    Ok(sets)
}

/// Reads a names file: one label per line, line index = class id.
pub fn parse_names(text: &str) -> Result<Vec<String>, GroundingError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            checked_label(line).ok_or_else(|| {
                GroundingError::format(Some(i + 1), format!("invalid class name `{line}`"))
            })
        })
        .collect()
}

fn parse_field<T: FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T, GroundingError> {
    let raw = field.ok_or_else(|| GroundingError::format(Some(line), format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| GroundingError::format(Some(line), format!("invalid {what} `{raw}`")))
}

/// Reads one YOLO label file: `class_id cx cy w h [conf]` per line with
/// coordinates normalized to the image size. A missing confidence is 1.0.
pub fn load_yolo(
    mut source: impl Read,
    meta: ImageMeta,
    names: &[String],
    threshold: f64,
) -> Result<DetectionSet, GroundingError> {
    check_threshold(threshold)?;
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let (w, h) = (f64::from(meta.width), f64::from(meta.height));
    let mut set = DetectionSet::new(meta);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut fields = raw.split_whitespace();
        let id: u32 = parse_field(fields.next(), line, "class id")?;
        let mut nums = [0.0f64; 4];
        for (slot, what) in nums.iter_mut().zip(["cx", "cy", "width", "height"]) {
            *slot = parse_field(fields.next(), line, what)?;
            if !slot.is_finite() {
                return Err(GroundingError::format(Some(line), format!("{what} is not finite")));
            }
        }
        let confidence: f64 = match fields.next() {
            Some(c) => parse_field(Some(c), line, "confidence")?,
            None => 1.0,
        };
        if fields.next().is_some() {
            return Err(GroundingError::format(Some(line), "too many fields"));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(GroundingError::format(
                Some(line),
                format!("confidence {confidence} outside [0, 1]"),
            ));
        }
        let label = names
            .get(id as usize)
            .ok_or(GroundingError::UnknownClassId { line, id })?;
        if confidence < threshold {
            continue;
        }
        let [cx, cy, bw, bh] = nums;
        let bbox = BBox::new(
            (cx - bw / 2.0) * w,
            (cy - bh / 2.0) * h,
            (cx + bw / 2.0) * w,
            (cy + bh / 2.0) * h,
        )
        .clamped(set.image.width, set.image.height)
        .map_err(|message| GroundingError::Geometry {
            image: set.image.id.clone(),
            message: format!("line {line}: {message}"),
        })?;
        set.detections.push(Detection {
            class_label: label.clone(),
            confidence,
            bbox,
        });
    }
    Ok(set)
}
