//! Multinomial naive Bayes over hypothesis word unigrams, and the majority-label baseline.
//!
//! The model never sees premises. Scoring is done in log space:
//!
//! ```text
//! score(y) = log P(y) + Σ_t count(t) · log P(t | y)
//! P(t | y) = (count(t, y) + alpha) / (tokens(y) + alpha · |V|)
//! ```
//!
//! Scores that agree to within a relative 1e-12 are treated as tied and the
//! label with the lowest ordinal wins, so exact ties do not depend on the
//! order floating-point terms were summed in.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSplit, Label};
use crate::error::{io_err, Error, Result};
use crate::features::{featurize, tokenize, FeatureVector, Vocabulary};

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const MODEL_SCHEMA_VERSION: u32 = 1;

const TIE_RELATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    alpha: f64,
    vocab: Vocabulary,
    class_log_prior: [f64; 3],
    /// `token_log_likelihood[label][token_index]`
    token_log_likelihood: [Vec<f64>; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub log_scores: [f64; 3],
}

/// Index of the best score; near-equal scores go to the lower ordinal.
pub(crate) fn argmax_with_ties(scores: &[f64; 3]) -> Label {
    let mut best = 0;
    for i in 1..3 {
        let tol = TIE_RELATIVE_TOLERANCE * scores[i].abs().max(scores[best].abs()).max(1.0);
        if scores[i] > scores[best] + tol {
            best = i;
        }
    }
    Label::ALL[best]
}

/// Fits the model on the hypotheses of `split`. Tokens outside `vocab` are ignored.
pub fn train_nb(split: &CorpusSplit, vocab: &Vocabulary, alpha: f64) -> Result<NbModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let v = vocab.len();
    let mut pair_counts = [0usize; 3];
    let mut token_counts: [Vec<u64>; 3] = [vec![0; v], vec![0; v], vec![0; v]];
    for pair in split.pairs() {
        let y = pair.label.index();
        pair_counts[y] += 1;
        for (i, c) in featurize(&tokenize(&pair.hypothesis), vocab).iter() {
            token_counts[y][i] += u64::from(c);
        }
    }
    if let Some(missing) = Label::ALL.into_iter().find(|l| pair_counts[l.index()] == 0) {
        return Err(Error::MissingLabel(missing));
    }

    let n = split.len() as f64;
    let class_log_prior = pair_counts.map(|c| (c as f64 / n).ln());
    let token_log_likelihood = token_counts.map(|counts| {
        let total: u64 = counts.iter().sum();
        let log_denom = (total as f64 + alpha * v as f64).ln();
        counts
            .iter()
            .map(|&c| (c as f64 + alpha).ln() - log_denom)
            .collect()
    });
    Ok(NbModel {
        alpha,
        vocab: vocab.clone(),
        class_log_prior,
        token_log_likelihood,
    })
}

impl NbModel {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn class_log_prior(&self) -> &[f64; 3] {
        &self.class_log_prior
    }

    pub fn token_log_likelihood(&self, label: Label) -> &[f64] {
        &self.token_log_likelihood[label.index()]
    }

    /// # Panics
    ///
    /// If a feature index is outside the model vocabulary.
    pub fn predict(&self, features: &FeatureVector) -> Prediction {
        let mut log_scores = self.class_log_prior;
        for (y, score) in log_scores.iter_mut().enumerate() {
            let ll = &self.token_log_likelihood[y];
            for (i, c) in features.iter() {
                *score += f64::from(c) * ll[i];
            }
        }
        Prediction {
            label: argmax_with_ties(&log_scores),
            log_scores,
        }
    }

    pub fn predict_text(&self, hypothesis: &str) -> Prediction {
        self.predict(&featurize(&tokenize(hypothesis), &self.vocab))
    }

    /// Predicted label for each pair's hypothesis, in split order.
    pub fn predict_split(&self, split: &CorpusSplit) -> Vec<Label> {
        split
            .pairs()
            .iter()
            .map(|p| self.predict_text(&p.hypothesis).label)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            schema_version: MODEL_SCHEMA_VERSION,
            alpha: self.alpha,
            labels: Label::ALL.to_vec(),
            log_priors: self.class_log_prior.to_vec(),
            vocab: self.vocab.clone(),
            log_likelihoods: self.token_log_likelihood.to_vec(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(json)?;
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: doc.schema_version,
                expected: MODEL_SCHEMA_VERSION,
            });
        }
        if doc.labels != Label::ALL {
            return Err(Error::InvalidModel("labels must be entailment, neutral, contradiction".into()));
        }
        let log_priors: [f64; 3] = doc
            .log_priors
            .try_into()
            .map_err(|_| Error::InvalidModel("expected three log priors".into()))?;
        let log_likelihoods: [Vec<f64>; 3] = doc
            .log_likelihoods
            .try_into()
            .map_err(|_| Error::InvalidModel("expected three likelihood rows".into()))?;
        if log_likelihoods.iter().any(|row| row.len() != doc.vocab.len()) {
            return Err(Error::InvalidModel("likelihood row length differs from vocabulary size".into()));
        }
        if !(doc.alpha > 0.0 && doc.alpha.is_finite()) {
            return Err(Error::InvalidAlpha(doc.alpha));
        }
        Ok(NbModel {
            alpha: doc.alpha,
            vocab: doc.vocab,
            class_log_prior: log_priors,
            token_log_likelihood: log_likelihoods,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(io_err(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(io_err(path))?)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    schema_version: u32,
    alpha: f64,
    labels: Vec<Label>,
    log_priors: Vec<f64>,
    vocab: Vocabulary,
    log_likelihoods: Vec<Vec<f64>>,
}

/// Constant classifier emitting the most frequent training label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub majority: Label,
    pub label_distribution: [f64; 3],
}

pub fn train_baseline(split: &CorpusSplit) -> Result<BaselineModel> {
    if split.is_empty() {
        return Err(Error::EmptySplit);
    }
    let counts = split.label_counts();
    let n = split.len() as f64;
    // strict comparison keeps the lowest ordinal on ties
    let mut majority = Label::Entailment;
    for label in Label::ALL {
        if counts[label.index()] > counts[majority.index()] {
            majority = label;
        }
    }
    Ok(BaselineModel {
        majority,
        label_distribution: counts.map(|c| c as f64 / n),
    })
}

impl BaselineModel {
    pub fn predict(&self) -> Label {
        self.majority
    }

    pub fn predict_split(&self, split: &CorpusSplit) -> Vec<Label> {
        vec![self.majority; split.len()]
    }
}
