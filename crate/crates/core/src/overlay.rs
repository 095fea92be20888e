//! SVG overlays for location answers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use base64::Engine as _;
use thiserror::Error;

use crate::grounding::{BBox, ImageMeta};
use crate::query::{fnv1a64, TaskLabel};
use crate::reasoner::{Answer, Payload};

pub const STROKE_WIDTH: u32 = 3;

pub const PALETTE: [&str; 12] = [
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#bfef45",
    "#fabed4", "#469990", "#9a6324",
];

#[derive(Debug, Error)]
pub enum OverlayError {
    #[error("overlays need a location answer, got a {0} answer")]
    NotLocation(TaskLabel),
    #[error("image `{0}` has no file path to embed")]
    MissingImagePath(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// How the background image is referenced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ImageRef {
    /// Link to the file path when there is one.
    #[default]
    Link,
    /// Inline the file as a base64 data URI.
    Embed,
}

pub fn palette_index(label: &str) -> usize {
    (fnv1a64(label.as_bytes()) % PALETTE.len() as u64) as usize
}

pub fn class_color(label: &str) -> &'static str {
    PALETTE[palette_index(label)]
}

/// A box to draw, with its 1-based index within its class.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlayBox {
    pub label: String,
    pub bbox: BBox,
    pub color: &'static str,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlaySpec {
    pub image: ImageMeta,
    pub boxes: Vec<OverlayBox>,
}

impl OverlaySpec {
    /// Boxes in entity order, then answer order within each class.
    pub fn from_answer(image: &ImageMeta, ans: &Answer) -> Result<Self, OverlayError> {
        if ans.task != TaskLabel::Location {
            return Err(OverlayError::NotLocation(ans.task));
        }
        let mut boxes = Vec::new();
        for label in &ans.entities {
            if let Some(Payload::Boxes(bs)) = ans.results.get(label) {
                for (i, b) in bs.iter().enumerate() {
                    boxes.push(OverlayBox {
                        label: label.clone(),
                        bbox: *b,
                        color: class_color(label),
                        index: i + 1,
                    });
                }
            }
        }
        Ok(OverlaySpec {
            image: image.clone(),
            boxes,
        })
    }
}

pub fn mime_type(path: &Path) -> &'static str {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("png") => "image/png",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("bmp") => "image/bmp",
        Some("tif" | "tiff") => "image/tiff",
        Some("svg") => "image/svg+xml",
        _ => "application/octet-stream",
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn render_overlay(image: &ImageMeta, ans: &Answer, mode: ImageRef) -> Result<String, OverlayError> {
    render_spec(&OverlaySpec::from_answer(image, ans)?, mode)
}

pub fn render_spec(spec: &OverlaySpec, mode: ImageRef) -> Result<String, OverlayError> {
    let img = &spec.image;
    let (w, h) = (img.width, img.height);
    let href = match (mode, &img.path) {
        (ImageRef::Link, None) => None,
        (ImageRef::Link, Some(p)) => Some(escape(&p.to_string_lossy())),
        (ImageRef::Embed, None) => return Err(OverlayError::MissingImagePath(img.id.clone())),
        (ImageRef::Embed, Some(p)) => {
            let bytes = std::fs::read(p).map_err(|source| OverlayError::Io {
                path: p.clone(),
                source,
            })?;
            let data = base64::engine::general_purpose::STANDARD.encode(bytes);
            Some(format!("data:{};base64,{data}", mime_type(p)))
        }
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    if let Some(href) = href {
        let _ = writeln!(out, r#"  <image href="{href}" x="0" y="0" width="{w}" height="{h}"/>"#);
    }
    for b in &spec.boxes {
        let BBox { x1, y1, x2, y2 } = b.bbox;
        let _ = writeln!(
            out,
            r#"  <rect x="{x1}" y="{y1}" width="{}" height="{}" fill="none" stroke="{}" stroke-width="{STROKE_WIDTH}" data-class="{}" data-box="{x1:?},{y1:?},{x2:?},{y2:?}"/>"#,
            x2 - x1,
            y2 - y1,
            b.color,
            b.label,
        );
        let _ = writeln!(
            out,
            r#"  <text x="{x1}" y="{}" fill="{}" font-size="14">{} {}</text>"#,
            (y1 - 4.0).max(10.0),
            b.color,
            escape(&b.label),
            b.index,
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
