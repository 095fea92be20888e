use std::ops::Mul;

use super::tokenize;

pub const DEFAULT_DIMENSION: usize = 1024;

/// Words that carry no task signal on their own. They are left out of the
/// unigram features but still take part in bigrams, so "is there" or
/// "how many" keep their meaning while "the" alone does not.
pub const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "and", "are", "at", "be", "in", "image", "is", "it", "its", "me", "of", "on", "or",
    "photo", "picture", "that", "the", "there", "this", "to", "what",
];

/// Dense text embedding. Encoders return either a unit vector or the zero
/// vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Self {
        Embedding(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Embedding(vec![0.0; dim])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.0.iter_mut().for_each(|v| *v /= n);
        }
        self
    }

    /// Cosine similarity; 0 when either side is the zero vector.
    pub fn cosine(&self, other: &Embedding) -> f64 {
        assert_eq!(self.dim(), other.dim(), "embedding dimensions differ");
        let (na, nb) = (self.norm(), other.norm());
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        dot / (na * nb)
    }

    /// Component-wise mean. Panics on an empty slice.
    pub fn mean(items: &[Embedding]) -> Embedding {
        let dim = items[0].dim();
        let mut acc = vec![0.0; dim];
        for e in items {
            assert_eq!(e.dim(), dim, "embedding dimensions differ");
            for (a, v) in acc.iter_mut().zip(&e.0) {
                *a += v;
            }
        }
        let n = items.len() as f64;
        Embedding(acc.into_iter().map(|a| a / n).collect())
    }
}

impl Mul<f64> for &Embedding {
    type Output = Embedding;

    fn mul(self, rhs: f64) -> Embedding {
        Embedding(self.0.iter().map(|v| v * rhs).collect())
    }
}

/// Turns text into a fixed-length vector.
pub trait TextEncoder: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Embedding;
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Signed feature hashing of word unigrams and bigrams, L2-normalized.
///
/// Each feature is hashed with FNV-1a; the low bit picks the sign (0 is +1)
/// and the remaining bits modulo the dimension pick the bucket. Bigrams are
/// the two lowercased words joined by one space.
#[derive(Clone, Debug)]
pub struct HashingEncoder {
    dim: usize,
}

impl Default for HashingEncoder {
    fn default() -> Self {
        HashingEncoder::new(DEFAULT_DIMENSION)
    }
}

impl HashingEncoder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        HashingEncoder { dim }
    }

    /// The feature strings of `text`, unigrams first.
    pub fn features(text: &str) -> Vec<String> {
        let words: Vec<String> = tokenize(text).into_iter().map(|t| t.text).collect();
        let mut features: Vec<String> = words
            .iter()
            .filter(|w| !FUNCTION_WORDS.contains(&w.as_str()))
            .cloned()
            .collect();
        features.extend(words.windows(2).map(|w| format!("{} {}", w[0], w[1])));
        features
    }

    pub fn bucket_and_sign(&self, feature: &str) -> (usize, f64) {
        let h = fnv1a64(feature.as_bytes());
        let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
        (((h >> 1) % self.dim as u64) as usize, sign)
    }
}

impl TextEncoder for HashingEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Embedding {
        let mut v = vec![0.0; self.dim];
        for feature in Self::features(text) {
            let (bucket, sign) = self.bucket_and_sign(&feature);
            v[bucket] += sign;
        }
        Embedding(v).normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 64 test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn features_skip_function_word_unigrams_only() {
        assert_eq!(
            HashingEncoder::features("Is there a zebra?"),
            vec!["zebra", "is there", "there a", "a zebra"]
        );
    }

    #[test]
    fn deterministic_unit_vectors() {
        let enc = HashingEncoder::default();
        let a = enc.embed("How many zebras are there?");
        let b = enc.embed("How many zebras are there?");
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        assert!((a.cosine(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_text_is_zero() {
        let enc = HashingEncoder::default();
        assert!(enc.embed("").is_zero());
        assert!(enc.embed("  ?! ").is_zero());
        assert_eq!(enc.embed("").cosine(&enc.embed("zebra")), 0.0);
    }

    #[test]
    fn disjoint_features_are_orthogonal() {
        let enc = HashingEncoder::default();
        let pairs = [("zebra", "giraffe"), ("count lions", "locate tigers")];
        for (x, y) in pairs {
            let fx: Vec<_> = HashingEncoder::features(x).iter().map(|f| enc.bucket_and_sign(f).0).collect();
            let fy: Vec<_> = HashingEncoder::features(y).iter().map(|f| enc.bucket_and_sign(f).0).collect();
            assert!(fx.iter().all(|b| !fy.contains(b)), "fixture pair collides: {x} / {y}");
            assert_eq!(enc.embed(x).cosine(&enc.embed(y)), 0.0);
        }
    }

    #[test]
    fn mean_and_scale() {
        let a = Embedding::new(vec![1.0, 0.0]);
        let b = Embedding::new(vec![0.0, 1.0]);
        assert_eq!(Embedding::mean(&[a.clone(), b]), Embedding::new(vec![0.5, 0.5]));
        assert_eq!(&a * 3.0, Embedding::new(vec![3.0, 0.0]));
    }
}
