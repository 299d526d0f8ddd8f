//! Tokenization and word-unigram count features.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSplit, SentencePair};

const STRIP: &[char] = &['.', ',', '!', '?', ';', ':', '"', '\'', '(', ')'];

/// Lowercased word tokens of one sentence. Tokens are never empty and never contain whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

/// Lowercase, split on Unicode whitespace, then trim surrounding punctuation
/// from each piece. Pieces left empty are dropped.
pub fn tokenize(text: &str) -> TokenSeq {
    TokenSeq(
        text.to_lowercase()
            .split_whitespace()
            .map(|piece| piece.trim_matches(STRIP))
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect(),
    )
}

/// Which sentence(s) of a pair to read tokens from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fields {
    Premise,
    Hypothesis,
    Both,
}

impl Fields {
    pub fn texts(self, pair: &SentencePair) -> impl Iterator<Item = &str> {
        let (p, h) = match self {
            Fields::Premise => (Some(pair.premise.as_str()), None),
            Fields::Hypothesis => (None, Some(pair.hypothesis.as_str())),
            Fields::Both => (Some(pair.premise.as_str()), Some(pair.hypothesis.as_str())),
        };
        p.into_iter().chain(h)
    }
}

/// Token ↔ index bijection, indices in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `token`, assigning the next free one if unseen.
    pub fn insert(&mut self, token: &str) -> usize {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        let i = self.tokens.len();
        self.index.insert(token.to_owned(), i);
        self.tokens.push(token.to_owned());
        i
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl From<Vec<String>> for Vocabulary {
    /// Later duplicates are ignored.
    fn from(tokens: Vec<String>) -> Self {
        let mut v = Vocabulary::new();
        for t in &tokens {
            v.insert(t);
        }
        v
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

pub fn build_vocab(split: &CorpusSplit, fields: Fields) -> Vocabulary {
    let mut vocab = Vocabulary::new();
    for pair in split.pairs() {
        for text in fields.texts(pair) {
            for tok in tokenize(text).iter() {
                vocab.insert(tok);
            }
        }
    }
    vocab
}

/// Sparse bag of in-vocabulary token counts, ordered by index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureVector(BTreeMap<usize, u32>);

impl FeatureVector {
    pub fn from_counts(counts: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut m = BTreeMap::new();
        for (i, c) in counts {
            if c > 0 {
                *m.entry(i).or_insert(0) += c;
            }
        }
        FeatureVector(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|(&i, &c)| (i, c))
    }

    pub fn get(&self, index: usize) -> u32 {
        self.0.get(&index).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().map(|&c| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&mut self, index: usize, count: u32) {
        if count > 0 {
            *self.0.entry(index).or_insert(0) += count;
        }
    }
}

/// Counts in-vocabulary tokens; out-of-vocabulary tokens are dropped.
pub fn featurize(seq: &TokenSeq, vocab: &Vocabulary) -> FeatureVector {
    let mut fv = FeatureVector::default();
    for tok in seq.iter() {
        if let Some(i) = vocab.get(tok) {
            fv.add(i, 1);
        }
    }
    fv
}
