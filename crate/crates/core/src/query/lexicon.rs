use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use super::{tokenize, QueryError};
use crate::grounding::checked_label;

/// Classes known out of the box.
pub const BUILTIN_CLASSES: &[&str] = &[
    "bear",
    "bird",
    "brown_bear",
    "buffalo",
    "butterfly",
    "camel",
    "cat",
    "cheetah",
    "cow",
    "crocodile",
    "deer",
    "dog",
    "duck",
    "eagle",
    "elephant",
    "fox",
    "giraffe",
    "goat",
    "goose",
    "hippo",
    "horse",
    "kangaroo",
    "leopard",
    "lion",
    "monkey",
    "owl",
    "ox",
    "penguin",
    "polar_bear",
    "rabbit",
    "rhino",
    "sheep",
    "squirrel",
    "tiger",
    "wolf",
    "zebra",
];

/// Extra surface forms for built-in classes.
const BUILTIN_SYNONYMS: &[(&str, &str)] = &[
    ("rhinoceros", "rhino"),
    ("hippopotamus", "hippo"),
    ("cattle", "cow"),
    ("grizzly", "brown_bear"),
    ("grizzly bear", "brown_bear"),
    ("ice bear", "polar_bear"),
    ("water buffalo", "buffalo"),
    ("cape buffalo", "buffalo"),
];

/// Plurals the suffix rules cannot produce.
const IRREGULAR_PLURALS: &[(&str, &str)] = &[
    ("wolf", "wolves"),
    ("ox", "oxen"),
    ("buffalo", "buffaloes"),
    ("goose", "geese"),
    ("mouse", "mice"),
    ("calf", "calves"),
    ("deer", "deer"),
    ("sheep", "sheep"),
    ("moose", "moose"),
    ("fish", "fish"),
    ("bison", "bison"),
    ("hippopotamus", "hippopotami"),
    ("rhinoceros", "rhinoceroses"),
    ("cattle", "cattle"),
];

/// Plural spellings of the last word of `surface`: `+s`, `+es` after
/// sibilants and `o`, `y -> ies` after a consonant, plus irregulars.
pub fn plural_forms(surface: &str) -> Vec<String> {
    let (prefix, last) = match surface.rsplit_once(' ') {
        Some((p, l)) => (format!("{p} "), l),
        None => (String::new(), surface),
    };
    let mut out = Vec::new();
    if let Some((_, irregular)) = IRREGULAR_PLURALS.iter().find(|(s, _)| *s == last) {
        out.push(format!("{prefix}{irregular}"));
    }
    out.push(format!("{prefix}{last}s"));
    if ["s", "x", "z", "ch", "sh", "o"].iter().any(|e| last.ends_with(e)) {
        out.push(format!("{prefix}{last}es"));
    }
    if let Some(stem) = last.strip_suffix('y') {
        if stem.chars().last().is_some_and(|c| !"aeiou".contains(c)) {
            out.push(format!("{prefix}{stem}ies"));
        }
    }
    out.retain(|p| p != surface);
    out.dedup();
    out
}

/// A mention of a class in a question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mention {
    pub label: String,
    /// Byte range of the matched words in the question.
    pub span: Range<usize>,
}

/// Surface form to class label table matched by longest token sequence.
#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    explicit: BTreeMap<Vec<String>, String>,
    generated: BTreeMap<Vec<String>, String>,
    max_words: usize,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// The built-in animal vocabulary with plural and synonym forms.
    pub fn builtin() -> Self {
        let mut lex = Lexicon::new();
        for class in BUILTIN_CLASSES {
            lex.add_class(class);
        }
        for (surface, label) in BUILTIN_SYNONYMS {
            lex.insert_explicit(surface, label)
                .expect("built-in synonyms are consistent");
        }
        lex
    }

    /// Parses `surface form => canonical_label` lines. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<Self, QueryError> {
        let mut lex = Lexicon::new();
        lex.extend_from_text(text)?;
        Ok(lex)
    }

    pub fn extend_from_text(&mut self, text: &str) -> Result<(), QueryError> {
        let mut file_keys: BTreeMap<Vec<String>, String> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| QueryError::Lexicon {
                line: i + 1,
                message,
            };
            let (surface, label) = line
                .split_once("=>")
                .ok_or_else(|| err("expected `surface form => label`".into()))?;
            let label = checked_label(label).ok_or_else(|| err(format!("invalid label `{}`", label.trim())))?;
            let key = tokenize(surface).into_iter().map(|t| t.text).collect::<Vec<_>>();
            if key.is_empty() {
                return Err(err("empty surface form".into()));
            }
            if let Some(prev) = file_keys.get(&key) {
                if *prev != label {
                    return Err(err(format!(
                        "`{}` maps to both `{prev}` and `{label}`",
                        key.join(" ")
                    )));
                }
            }
            file_keys.insert(key, label.clone());
            self.insert_explicit(surface, &label).map_err(err)?;
        }
        Ok(())
    }

    /// Adds a class under its own spellings (`polar_bear`, `polar bear`)
    /// and their plurals.
    pub fn add_class(&mut self, label: &str) {
        let spaced = label.replace('_', " ");
        self.insert_generated(label, label);
        self.insert_generated(&spaced, label);
        for plural in plural_forms(&spaced) {
            self.insert_generated(&plural, label);
        }
    }

    fn insert_explicit(&mut self, surface: &str, label: &str) -> Result<(), String> {
        let key: Vec<String> = tokenize(surface).into_iter().map(|t| t.text).collect();
        if key.is_empty() {
            return Err("empty surface form".into());
        }
        self.max_words = self.max_words.max(key.len());
        self.generated.remove(&key);
        self.explicit.insert(key, label.to_string());
        let plain = surface.trim().to_lowercase();
        for plural in plural_forms(&plain) {
            let key: Vec<String> = tokenize(&plural).into_iter().map(|t| t.text).collect();
            if !self.explicit.contains_key(&key) {
                self.max_words = self.max_words.max(key.len());
                self.generated.insert(key, label.to_string());
            }
        }
        self.add_class(label);
        Ok(())
    }

    fn insert_generated(&mut self, surface: &str, label: &str) {
        let key: Vec<String> = tokenize(surface).into_iter().map(|t| t.text).collect();
        if key.is_empty() || self.explicit.contains_key(&key) || self.generated.contains_key(&key) {
            return;
        }
        self.max_words = self.max_words.max(key.len());
        self.generated.insert(key, label.to_string());
    }

    pub fn len(&self) -> usize {
        self.explicit.len() + self.generated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, surface: &str) -> Option<&str> {
        let key: Vec<String> = tokenize(surface).into_iter().map(|t| t.text).collect();
        self.lookup(&key)
    }

    fn lookup(&self, key: &[String]) -> Option<&str> {
        self.explicit
            .get(key)
            .or_else(|| self.generated.get(key))
            .map(String::as_str)
    }

    /// All surface forms with their labels, space-joined.
    pub fn entries(&self) -> impl Iterator<Item = (String, &str)> {
        self.explicit
            .iter()
            .chain(self.generated.iter())
            .map(|(k, v)| (k.join(" "), v.as_str()))
    }

    /// The class vocabulary: every label the lexicon can produce.
    pub fn labels(&self) -> BTreeSet<String> {
        self.explicit.values().chain(self.generated.values()).cloned().collect()
    }

    /// Every lexicon mention in `question`, scanning left to right and
    /// preferring the longest key at each position.
    pub fn mentions(&self, question: &str) -> Vec<Mention> {
        let tokens = tokenize(question);
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let longest = self.max_words.min(tokens.len() - i);
            let hit = (1..=longest).rev().find_map(|n| {
                let key: Vec<String> = tokens[i..i + n].iter().map(|t| t.text.clone()).collect();
                self.lookup(&key).map(|label| (n, label.to_string()))
            });
            match hit {
                Some((n, label)) => {
                    out.push(Mention {
                        label,
                        span: tokens[i].span.start..tokens[i + n - 1].span.end,
                    });
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }

    /// Class labels mentioned in `question`, deduplicated in order of first
    /// mention.
    pub fn extract(&self, question: &str) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for m in self.mentions(question) {
            if !labels.contains(&m.label) {
                labels.push(m.label);
            }
        }
        labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plurals() {
        assert_eq!(plural_forms("zebra"), vec!["zebras"]);
        assert_eq!(plural_forms("fox"), vec!["foxs", "foxes"]);
        assert_eq!(plural_forms("butterfly"), vec!["butterflys", "butterflies"]);
        assert_eq!(plural_forms("monkey"), vec!["monkeys"]);
        assert!(plural_forms("wolf").contains(&"wolves".to_string()));
        assert!(plural_forms("polar bear").contains(&"polar bears".to_string()));
        assert_eq!(plural_forms("sheep"), vec!["sheeps"]);
    }

    #[test]
    fn reference_phrasings() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.extract("Count zebra and buffalo"), vec!["zebra", "buffalo"]);
        assert_eq!(lex.extract("How many tigers are there?"), vec!["tiger"]);
        assert_eq!(lex.extract("Where are zebras and cows in the image?"), vec!["zebra", "cow"]);
    }

    #[test]
    fn longest_match_wins() {
        let lex = Lexicon::builtin();
        assert_eq!(
            lex.extract("Where is the polar bear near the brown bear?"),
            vec!["polar_bear", "brown_bear"]
        );
        assert_eq!(lex.extract("a bear and a polar bear"), vec!["bear", "polar_bear"]);
    }

    #[test]
    fn irregulars_and_synonyms() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.extract("wolves, oxen and buffaloes"), vec!["wolf", "ox", "buffalo"]);
        assert_eq!(lex.extract("Is there a rhinoceros?"), vec!["rhino"]);
    }

    #[test]
    fn canonical_labels_extract_to_themselves() {
        let lex = Lexicon::builtin();
        for label in lex.labels() {
            assert_eq!(lex.extract(&label), vec![label.clone()]);
        }
    }

    #[test]
    fn deduplicates_in_first_mention_order() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.extract("zebra, lions, zebras and a lion"), vec!["zebra", "lion"]);
    }

    #[test]
    fn mention_spans_point_into_the_question() {
        let lex = Lexicon::builtin();
        let q = "Where is the Polar Bear?";
        let m = lex.mentions(q);
        assert_eq!(&q[m[0].span.clone()], "Polar Bear");
    }

    #[test]
    fn file_format() {
        let lex = Lexicon::parse("# custom\nsnow leopard => snow_leopard\nbig cat => lion\n").unwrap();
        assert_eq!(lex.extract("two snow leopards and a big cat"), vec!["snow_leopard", "lion"]);
        assert_eq!(lex.labels().len(), 2);
    }

    #[test]
    fn file_conflicts_and_errors() {
        let err = Lexicon::parse("cat => lion\ncat => tiger").unwrap_err();
        assert!(matches!(err, QueryError::Lexicon { line: 2, .. }), "{err}");
        assert!(Lexicon::parse("no arrow here").is_err());
        assert!(Lexicon::parse(" => lion").is_err());
        assert!(Lexicon::parse("cat => Big Cat!").is_err());
    }

    #[test]
    fn file_entries_override_builtin() {
        let mut lex = Lexicon::builtin();
        lex.extend_from_text("bear => brown_bear").unwrap();
        assert_eq!(lex.extract("a bear"), vec!["brown_bear"]);
        assert_eq!(lex.extract("bears"), vec!["brown_bear"]);
    }
}
