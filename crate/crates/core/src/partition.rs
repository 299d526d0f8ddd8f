//! Empirical easy/hard partition of a test split and premise masking.
//!
//! A test pair is *easy* when the hypothesis-only model recovers its gold
//! label, *hard* otherwise.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSplit, Label, SentencePair};
use crate::error::{io_err, Error, Result};
use crate::features::tokenize;
use crate::nb::NbModel;

pub const DEFAULT_UNK_SYMBOL: &str = "<unk>";

const EASY_HEADER: &str = "#easy";
const HARD_HEADER: &str = "#hard";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubsetCounts {
    pub easy: usize,
    pub hard: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionManifest {
    pub easy_ids: Vec<String>,
    pub hard_ids: Vec<String>,
    /// Indexed by `Label::index`.
    pub per_label_breakdown: [SubsetCounts; 3],
}

impl PartitionManifest {
    pub fn total(&self) -> usize {
        self.easy_ids.len() + self.hard_ids.len()
    }

    /// Fraction of pairs in the easy subset; 0 for an empty manifest.
    pub fn easy_ratio(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.easy_ids.len() as f64 / self.total() as f64
        }
    }

    /// Share of the most frequent gold label within the easy subset.
    pub fn easy_majority_share(&self) -> f64 {
        let n = self.easy_ids.len();
        if n == 0 {
            return 0.0;
        }
        let max = self.per_label_breakdown.iter().map(|c| c.easy).max().unwrap_or(0);
        max as f64 / n as f64
    }

    /// Rebuilds a manifest from id lists, taking labels from `split`.
    /// The two lists must be disjoint and together cover the split exactly.
    pub fn from_ids(easy_ids: Vec<String>, hard_ids: Vec<String>, split: &CorpusSplit) -> Result<Self> {
        let labels: HashMap<&str, Label> = split.pairs().iter().map(|p| (p.id.as_str(), p.label)).collect();
        let mut breakdown = [SubsetCounts::default(); 3];
        let mut seen = std::collections::HashSet::new();
        for (ids, easy) in [(&easy_ids, true), (&hard_ids, false)] {
            for id in ids {
                let label = *labels
                    .get(id.as_str())
                    .ok_or_else(|| Error::ManifestMismatch(format!("id {id:?} is not in the split")))?;
                if !seen.insert(id.as_str()) {
                    return Err(Error::ManifestMismatch(format!("id {id:?} listed twice")));
                }
                let cell = &mut breakdown[label.index()];
                if easy {
                    cell.easy += 1;
                } else {
                    cell.hard += 1;
                }
            }
        }
        if seen.len() != split.len() {
            return Err(Error::ManifestMismatch(format!(
                "manifest lists {} of {} pairs",
                seen.len(),
                split.len()
            )));
        }
        Ok(PartitionManifest {
            easy_ids,
            hard_ids,
            per_label_breakdown: breakdown,
        })
    }

    /// `#easy`, the easy ids one per line, `#hard`, the hard ids one per line.
    pub fn render(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(EASY_HEADER);
        out.push('\n');
        for id in &self.easy_ids {
            push_id(&mut out, id)?;
        }
        out.push_str(HARD_HEADER);
        out.push('\n');
        for id in &self.hard_ids {
            push_id(&mut out, id)?;
        }
        Ok(out)
    }
}

fn push_id(out: &mut String, id: &str) -> Result<()> {
    if id.is_empty() || id.starts_with('#') || id.contains(['\n', '\r']) || id.trim() != id {
        return Err(Error::InvalidManifestId(id.to_string()));
    }
    out.push_str(id);
    out.push('\n');
    Ok(())
}

/// Splits `test` by comparing `predictions` (aligned with the split) to gold labels.
pub fn partition_from_predictions(test: &CorpusSplit, predictions: &[Label]) -> Result<PartitionManifest> {
    if predictions.len() != test.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: test.len(),
        });
    }
    let mut manifest = PartitionManifest {
        easy_ids: Vec::new(),
        hard_ids: Vec::new(),
        per_label_breakdown: [SubsetCounts::default(); 3],
    };
    for (pair, &pred) in test.pairs().iter().zip(predictions) {
        let cell = &mut manifest.per_label_breakdown[pair.label.index()];
        if pred == pair.label {
            manifest.easy_ids.push(pair.id.clone());
            cell.easy += 1;
        } else {
            manifest.hard_ids.push(pair.id.clone());
            cell.hard += 1;
        }
    }
    Ok(manifest)
}

pub fn partition_easy_hard(model: &NbModel, test: &CorpusSplit) -> PartitionManifest {
    partition_from_predictions(test, &model.predict_split(test)).expect("one prediction per pair")
}

pub fn export_manifest(manifest: &PartitionManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, manifest.render()?).map_err(io_err(path))
}

/// Parses manifest text into `(easy_ids, hard_ids)`.
pub fn parse_manifest(text: &str) -> Result<(Vec<String>, Vec<String>)> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    if lines.next() != Some(EASY_HEADER) {
        return Err(Error::ManifestMismatch(format!("first line must be {EASY_HEADER}")));
    }
    let (mut easy, mut hard) = (Vec::new(), Vec::new());
    let mut in_hard = false;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        if line == HARD_HEADER && !in_hard {
            in_hard = true;
        } else if line.starts_with('#') {
            return Err(Error::ManifestMismatch(format!("unexpected section {line:?}")));
        } else if in_hard {
            hard.push(line.to_string());
        } else {
            easy.push(line.to_string());
        }
    }
    if !in_hard {
        return Err(Error::ManifestMismatch(format!("missing {HARD_HEADER} section")));
    }
    Ok((easy, hard))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<String>)> {
    let path = path.as_ref();
    parse_manifest(&fs::read_to_string(path).map_err(io_err(path))?)
}

/// Replaces every premise token with `unk_symbol`, keeping the token count.
/// Hypotheses, labels and ids are untouched.
pub fn mask_premises(split: &CorpusSplit, unk_symbol: &str) -> Result<CorpusSplit> {
    if tokenize(unk_symbol).tokens() != [unk_symbol] {
        return Err(Error::InvalidUnkSymbol(unk_symbol.to_string()));
    }
    let pairs: Vec<SentencePair> = split
        .pairs()
        .iter()
        .map(|p| SentencePair {
            premise: vec![unk_symbol; tokenize(&p.premise).len()].join(" "),
            ..p.clone()
        })
        .collect();
    // a premise of pure punctuation masks to an empty string, which the
    // validating constructor would reject
    Ok(CorpusSplit::from_parts_unchecked(split.name(), pairs))
}
