//! Natural-language questions to (entities, task) pairs.
//!
//! Entities come from a closed-vocabulary [`Lexicon`]; the task is the
//! label whose prototype embedding is closest in cosine to the question's.
//! Both the extractor and the encoder are traits so a learned model can be
//! dropped in.

mod encoder;
mod lexicon;
mod task;

use std::collections::BTreeSet;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

pub use encoder::{fnv1a64, Embedding, HashingEncoder, TextEncoder, DEFAULT_DIMENSION, FUNCTION_WORDS};
pub use lexicon::{plural_forms, Lexicon, Mention, BUILTIN_CLASSES};
pub use task::{
    classify_embedding, classify_task, Paraphrases, Prototypes, TaskFlags, TaskLabel, DEFAULT_PARAPHRASES,
    DEFAULT_TAU,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("cannot tell what `{question}` asks for (best task score {best_score:.3})")]
    Unclassifiable { question: String, best_score: f64 },
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error("paraphrase line {line}: {message}")]
    Paraphrases { line: usize, message: String },
    #[error("no usable prototype for task `{0}`")]
    IncompletePrototypes(TaskLabel),
}

/// A lowercased word and where it sits in the source text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

/// Splits on Unicode word boundaries and lowercases each word.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.unicode_word_indices()
        .map(|(start, word)| Token {
            text: word.to_lowercase(),
            span: start..start + word.len(),
        })
        .collect()
}

/// Finds the classes a question mentions.
pub trait EntityExtractor: Send + Sync {
    /// Canonical labels in order of first mention, without duplicates.
    fn extract(&self, question: &str) -> Vec<String>;
    /// Every label this extractor can produce.
    fn vocabulary(&self) -> BTreeSet<String>;
}

impl EntityExtractor for Lexicon {
    fn extract(&self, question: &str) -> Vec<String> {
        Lexicon::extract(self, question)
    }

    fn vocabulary(&self) -> BTreeSet<String> {
        self.labels()
    }
}

pub fn extract_entities(question: &str, lexicon: &Lexicon) -> Vec<String> {
    lexicon.extract(question)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedQuery {
    pub raw: String,
    pub entities: Vec<String>,
    pub task: TaskFlags,
}

/// Extractor, encoder and prototypes bundled for repeated use.
#[derive(Clone)]
pub struct QueryParser {
    extractor: Arc<dyn EntityExtractor>,
    encoder: Arc<dyn TextEncoder>,
    prototypes: Prototypes,
    tau: f64,
}

impl QueryParser {
    pub fn new(
        extractor: Arc<dyn EntityExtractor>,
        encoder: Arc<dyn TextEncoder>,
        prototypes: Prototypes,
        tau: f64,
    ) -> Self {
        QueryParser {
            extractor,
            encoder,
            prototypes,
            tau,
        }
    }

    /// Lexicon extraction with the hashing encoder and paraphrase-mean
    /// prototypes.
    pub fn with_lexicon(lexicon: Lexicon, paraphrases: &Paraphrases, tau: f64) -> Result<Self, QueryError> {
        let encoder = HashingEncoder::default();
        let prototypes = Prototypes::from_paraphrases(paraphrases, &encoder)?;
        Ok(QueryParser::new(Arc::new(lexicon), Arc::new(encoder), prototypes, tau))
    }

    /// Built-in lexicon, paraphrases and threshold.
    pub fn builtin() -> Self {
        QueryParser::with_lexicon(Lexicon::builtin(), &Paraphrases::default(), DEFAULT_TAU)
            .expect("built-in prototypes are complete")
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn prototypes(&self) -> &Prototypes {
        &self.prototypes
    }

    pub fn encoder(&self) -> &dyn TextEncoder {
        self.encoder.as_ref()
    }

    pub fn vocabulary(&self) -> BTreeSet<String> {
        self.extractor.vocabulary()
    }

    pub fn extract_entities(&self, question: &str) -> Vec<String> {
        self.extractor.extract(question)
    }

    pub fn classify(&self, question: &str) -> Result<TaskFlags, QueryError> {
        classify_task(question, self.encoder.as_ref(), &self.prototypes, self.tau)
    }

    pub fn parse(&self, question: &str) -> Result<ParsedQuery, QueryError> {
        let entities = self.extract_entities(question);
        let task = self.classify(question)?;
        Ok(ParsedQuery {
            raw: question.to_string(),
            entities,
            task,
        })
    }
}

impl std::fmt::Debug for QueryParser {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QueryParser")
            .field("dim", &self.encoder.dim())
            .field("tau", &self.tau)
            .finish_non_exhaustive()
    }
}
