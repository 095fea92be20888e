//! Loading a whole dataset from a TOML config file.
//!
//! ```toml
//! detections = "detections.json"   # file (json) or directory of .txt files (yolo)
//! format = "json"                  # json | yolo
//! images = "images"                # optional image directory
//! names = "names.txt"              # yolo only
//! rules = "rules.pl"               # optional, defaults to the built-in rule
//! lexicon = "lexicon.txt"          # optional extra `surface => label` lines
//! paraphrases = "paraphrases.txt"  # optional task phrases
//! threshold = 0.25
//! tau = 0.05
//! bind = "127.0.0.1:8080"
//! ```
//!
//! Relative paths are resolved against the directory holding the config.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::grounding::{
    ground, load_json, load_rules, load_yolo, parse_names, DetectionFormat, DetectionSet, GroundingError,
    ImageMeta, SymbolicKb, DEFAULT_RULES, DEFAULT_THRESHOLD,
};
use crate::logic::Program;
use crate::query::{Lexicon, Paraphrases, QueryError, QueryParser, DEFAULT_TAU};
use crate::reasoner::{ask, Answer, AskError};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

const IMAGE_EXTENSIONS: &[&str] = &["jpg", "jpeg", "png", "webp", "bmp", "gif", "tif", "tiff"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Grounding {
        path: PathBuf,
        #[source]
        source: GroundingError,
    },
    #[error("{path}: {source}")]
    Query {
        path: PathBuf,
        #[source]
        source: QueryError,
    },
    #[error("duplicate image id `{0}`")]
    DuplicateImage(String),
    #[error("no image file for `{id}` in {dir}")]
    MissingImage { id: String, dir: PathBuf },
    #[error("unknown image `{0}`")]
    UnknownImage(String),
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

fn default_bind() -> String {
    DEFAULT_BIND.into()
}

fn default_format() -> String {
    "json".into()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    detections: PathBuf,
    #[serde(default = "default_format")]
    format: String,
    images: Option<PathBuf>,
    names: Option<PathBuf>,
    rules: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    paraphrases: Option<PathBuf>,
    #[serde(default = "default_threshold")]
    threshold: f64,
    #[serde(default = "default_tau")]
    tau: f64,
    #[serde(default = "default_bind")]
    bind: String,
}

/// Dataset settings with every path made absolute or config-relative.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetConfig {
    pub detections: PathBuf,
    pub format: DetectionFormat,
    pub images: Option<PathBuf>,
    pub names: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub paraphrases: Option<PathBuf>,
    pub threshold: f64,
    pub tau: f64,
    pub bind: String,
}

impl DatasetConfig {
    pub fn new(detections: impl Into<PathBuf>, format: DetectionFormat) -> Self {
        DatasetConfig {
            detections: detections.into(),
            format,
            images: None,
            names: None,
            rules: None,
            lexicon: None,
            paraphrases: None,
            threshold: DEFAULT_THRESHOLD,
            tau: DEFAULT_TAU,
            bind: DEFAULT_BIND.into(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, DatasetError> {
        let text = read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|message| DatasetError::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Parses config text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        let format: DetectionFormat = raw.format.parse()?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        if format == DetectionFormat::Yolo && (raw.names.is_none() || raw.images.is_none()) {
            return Err("yolo datasets need `names` and `images`".into());
        }
        if !(0.0..=1.0).contains(&raw.threshold) {
            return Err(format!("threshold {} outside [0, 1]", raw.threshold));
        }
        if !raw.tau.is_finite() {
            return Err("tau must be finite".into());
        }
        Ok(DatasetConfig {
            detections: resolve(raw.detections),
            format,
            images: raw.images.map(resolve),
            names: raw.names.map(resolve),
            rules: raw.rules.map(resolve),
            lexicon: raw.lexicon.map(resolve),
            paraphrases: raw.paraphrases.map(resolve),
            threshold: raw.threshold,
            tau: raw.tau,
            bind: raw.bind,
        })
    }
}

fn find_image(dir: &Path, stem: &str) -> Option<PathBuf> {
    IMAGE_EXTENSIONS
        .iter()
        .map(|ext| dir.join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
}

/// Reads every detection set the config points at.
pub fn load_sets(cfg: &DatasetConfig) -> Result<Vec<DetectionSet>, DatasetError> {
    let grounding = |path: &Path| {
        let path = path.to_path_buf();
        move |source| DatasetError::Grounding { path, source }
    };
    match cfg.format {
        DetectionFormat::Json => {
            let text = read(&cfg.detections)?;
            let mut sets = load_json(text.as_bytes(), cfg.threshold).map_err(grounding(&cfg.detections))?;
            for set in &mut sets {
                let img = &mut set.image;
                img.path = match (&img.path, &cfg.images) {
                    (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
                    (Some(p), None) if p.is_relative() => {
                        Some(cfg.detections.parent().unwrap_or(Path::new(".")).join(p))
                    }
                    (Some(p), _) => Some(p.clone()),
                    (None, Some(dir)) => find_image(dir, &img.id),
                    (None, None) => None,
                };
            }
            Ok(sets)
        }
        DetectionFormat::Yolo => {
            let names_path = cfg.names.as_deref().expect("checked when the config was built");
            let images = cfg.images.as_deref().expect("checked when the config was built");
            let names = parse_names(&read(names_path)?).map_err(grounding(names_path))?;
            let entries = fs::read_dir(&cfg.detections).map_err(|source| DatasetError::Io {
                path: cfg.detections.clone(),
                source,
            })?;
            let mut files: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "txt"))
                .collect();
            files.sort();
            let mut sets = Vec::with_capacity(files.len());
            for file in files {
                let id = file.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                let image = find_image(images, &id).ok_or_else(|| DatasetError::MissingImage {
                    id: id.clone(),
                    dir: images.to_path_buf(),
                })?;
                let size = imagesize::size(&image).map_err(|e| DatasetError::Io {
                    path: image.clone(),
                    source: std::io::Error::other(e.to_string()),
                })?;
                let meta = ImageMeta::new(id, size.width as u32, size.height as u32).with_path(image);
                let text = read(&file)?;
                sets.push(load_yolo(text.as_bytes(), meta, &names, cfg.threshold).map_err(grounding(&file))?);
            }
            Ok(sets)
        }
    }
}

pub fn load_rule_program(cfg: &DatasetConfig) -> Result<Program, DatasetError> {
    match &cfg.rules {
        Some(path) => load_rules(&read(path)?).map_err(|source| DatasetError::Grounding {
            path: path.clone(),
            source,
        }),
        None => Ok(load_rules(DEFAULT_RULES).expect("built-in rules load")),
    }
}

/// Grounded knowledge bases for every image plus the question parser.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub config: DatasetConfig,
    kbs: BTreeMap<String, SymbolicKb>,
    parser: QueryParser,
}

impl Dataset {
    pub fn load(config_path: &Path) -> Result<Self, DatasetError> {
        Self::from_config(DatasetConfig::from_file(config_path)?)
    }

    pub fn from_config(config: DatasetConfig) -> Result<Self, DatasetError> {
        let rules = load_rule_program(&config)?;
        let sets = load_sets(&config)?;

        let mut lexicon = Lexicon::builtin();
        if let Some(path) = &config.lexicon {
            lexicon
                .extend_from_text(&read(path)?)
                .map_err(|source| DatasetError::Query {
                    path: path.clone(),
                    source,
                })?;
        }
        let paraphrases = match &config.paraphrases {
            Some(path) => Paraphrases::parse(&read(path)?).map_err(|source| DatasetError::Query {
                path: path.clone(),
                source,
            })?,
            None => Paraphrases::default(),
        };

        let mut kbs = BTreeMap::new();
        for set in &sets {
            for det in &set.detections {
                if lexicon.get(&det.class_label).is_none() {
                    lexicon.add_class(&det.class_label);
                }
            }
            let kb = ground(set, &rules).map_err(|source| DatasetError::Grounding {
                path: config.detections.clone(),
                source,
            })?;
            if kbs.insert(set.image.id.clone(), kb).is_some() {
                return Err(DatasetError::DuplicateImage(set.image.id.clone()));
            }
        }
        let parser = QueryParser::with_lexicon(lexicon, &paraphrases, config.tau).map_err(|source| {
            DatasetError::Query {
                path: config.paraphrases.clone().unwrap_or_default(),
                source,
            }
        })?;
        Ok(Dataset { config, kbs, parser })
    }

    pub fn parser(&self) -> &QueryParser {
        &self.parser
    }

    pub fn kb(&self, id: &str) -> Option<&SymbolicKb> {
        self.kbs.get(id)
    }

    /// Knowledge bases ordered by image id.
    pub fn kbs(&self) -> impl Iterator<Item = &SymbolicKb> {
        self.kbs.values()
    }

    pub fn len(&self) -> usize {
        self.kbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kbs.is_empty()
    }

    pub fn vocabulary(&self) -> Vec<String> {
        self.parser.vocabulary().into_iter().collect()
    }

    pub fn ask(&self, image_id: &str, question: &str) -> Result<Answer, DatasetAskError> {
        let kb = self
            .kb(image_id)
            .ok_or_else(|| DatasetAskError::UnknownImage(image_id.to_string()))?;
        Ok(ask(kb, &self.parser, question)?)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetAskError {
    #[error("unknown image `{0}`")]
    UnknownImage(String),
    #[error(transparent)]
    Ask(#[from] AskError),
}

#[cfg(test)]
mod tests {
    use super::*;

    const DETECTIONS: &str = r#"{"images":[
      {"id":"img2","width":100,"height":100,"detections":[]},
      {"id":"img1","width":640,"height":480,"path":"img1.jpg","detections":[
        {"class":"Zebra","confidence":0.9,"bbox":[10,20,110,220]},
        {"class":"okapi","confidence":0.8,"bbox":[1,2,3,4]}]}]}"#;

    #[test]
    fn config_paths_are_relative_to_file() {
        let cfg = DatasetConfig::parse("detections = \"d.json\"\nimages = \"/abs/img\"", Path::new("/data")).unwrap();
        assert_eq!(cfg.detections, Path::new("/data/d.json"));
        assert_eq!(cfg.images.as_deref(), Some(Path::new("/abs/img")));
        assert_eq!(cfg.format, DetectionFormat::Json);
        assert_eq!(cfg.threshold, 0.25);
        assert_eq!(cfg.bind, DEFAULT_BIND);
    }

    #[test]
    fn config_errors() {
        let base = Path::new(".");
        assert!(DatasetConfig::parse("", base).is_err());
        assert!(DatasetConfig::parse("detections = \"d\"\nformat = \"coco\"", base).is_err());
        assert!(DatasetConfig::parse("detections = \"d\"\nformat = \"yolo\"", base).is_err());
        assert!(DatasetConfig::parse("detections = \"d\"\nthreshold = 2.0", base).is_err());
        assert!(DatasetConfig::parse("detections = \"d\"\nport = 1", base).is_err());
    }

    #[test]
    fn json_dataset() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("d.json"), DETECTIONS).unwrap();
        fs::write(dir.path().join("lex.txt"), "striped horse => zebra\n").unwrap();
        fs::write(
            dir.path().join("z.toml"),
            "detections = \"d.json\"\nimages = \"imgs\"\nlexicon = \"lex.txt\"\n",
        )
        .unwrap();
        let ds = Dataset::load(&dir.path().join("z.toml")).unwrap();
        let ids: Vec<_> = ds.kbs().map(|k| k.image.id.as_str()).collect();
        assert_eq!(ids, ["img1", "img2"]);
        assert_eq!(ds.kb("img1").unwrap().image.path, Some(dir.path().join("imgs/img1.jpg")));
        assert!(ds.vocabulary().contains(&"okapi".to_string()));
        let a = ds.ask("img1", "How many striped horses are there?").unwrap();
        assert_eq!(a.count("zebra"), Some(1));
        assert_eq!(ds.ask("nope", "How many zebras?"), Err(DatasetAskError::UnknownImage("nope".into())));
    }

    #[test]
    fn yolo_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        fs::create_dir(p.join("labels")).unwrap();
        fs::create_dir(p.join("images")).unwrap();
        // Minimal 640x480 PNG header: signature plus IHDR.
        let mut png = vec![0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a, 0, 0, 0, 13];
        png.extend_from_slice(b"IHDR");
        png.extend_from_slice(&640u32.to_be_bytes());
        png.extend_from_slice(&480u32.to_be_bytes());
        png.extend_from_slice(&[8, 2, 0, 0, 0, 0, 0, 0, 0]);
        fs::write(p.join("images/a.png"), &png).unwrap();
        fs::write(p.join("labels/a.txt"), "0 0.5 0.5 0.5 0.5 0.9\n").unwrap();
        fs::write(p.join("names.txt"), "zebra\n").unwrap();
        fs::write(
            p.join("z.toml"),
            "detections = \"labels\"\nformat = \"yolo\"\nimages = \"images\"\nnames = \"names.txt\"\n",
        )
        .unwrap();
        let ds = Dataset::load(&p.join("z.toml")).unwrap();
        let a = ds.ask("a", "Locate zebras in the image").unwrap();
        assert_eq!(a.boxes("zebra").unwrap()[0].to_array(), [160.0, 120.0, 480.0, 360.0]);

        fs::write(p.join("labels/b.txt"), "0 0.5 0.5 0.5 0.5\n").unwrap();
        assert!(matches!(Dataset::load(&p.join("z.toml")), Err(DatasetError::MissingImage { .. })));
    }
}
