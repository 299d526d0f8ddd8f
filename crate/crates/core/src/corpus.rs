//! Corpus data model and loaders for the SNLI, SICK and generic JSONL formats.
//!
//! All loaders stream their input once, keep records in source-file order, and
//! reject undecodable UTF-8 instead of replacing it.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

/// Three-way textual entailment label, ordered Entailment < Neutral < Contradiction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Neutral, Label::Contradiction];

    /// Ordinal position, also used as the index into per-label arrays.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }

    /// Case-insensitive parse. The SNLI no-consensus marker `-` is not a label.
    pub fn parse(s: &str) -> Option<Label> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Label::Entailment => "Entailment",
            Label::Neutral => "Neutral",
            Label::Contradiction => "Contradiction",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: String,
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Dev, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered, validated collection of pairs for one split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSplit {
    name: SplitName,
    pairs: Vec<SentencePair>,
}

impl CorpusSplit {
    /// Checks id uniqueness and that neither sentence is blank.
    pub fn new(name: SplitName, pairs: Vec<SentencePair>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for p in &pairs {
            if p.premise.trim().is_empty() {
                return Err(Error::EmptySentence {
                    id: p.id.clone(),
                    field: "premise",
                });
            }
            if p.hypothesis.trim().is_empty() {
                return Err(Error::EmptySentence {
                    id: p.id.clone(),
                    field: "hypothesis",
                });
            }
            if !seen.insert(p.id.as_str()) {
                return Err(Error::DuplicateId(p.id.clone()));
            }
        }
        Ok(CorpusSplit { name, pairs })
    }

    /// Skips sentence checks; ids must already be unique.
    pub(crate) fn from_parts_unchecked(name: SplitName, pairs: Vec<SentencePair>) -> Self {
        CorpusSplit { name, pairs }
    }

    pub fn empty(name: SplitName) -> Self {
        CorpusSplit {
            name,
            pairs: Vec::new(),
        }
    }

    pub fn name(&self) -> SplitName {
        self.name
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.pairs.iter().map(|p| p.label)
    }

    /// Label histogram indexed by `Label::index`.
    pub fn label_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for l in self.labels() {
            counts[l.index()] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceFormat {
    SnliJsonl,
    SickTsv,
    GenericJsonl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub train: CorpusSplit,
    pub dev: CorpusSplit,
    pub test: CorpusSplit,
    pub source_format: SourceFormat,
}

impl Corpus {
    pub fn split(&self, name: SplitName) -> &CorpusSplit {
        match name {
            SplitName::Train => &self.train,
            SplitName::Dev => &self.dev,
            SplitName::Test => &self.test,
        }
    }

    pub fn splits(&self) -> [&CorpusSplit; 3] {
        [&self.train, &self.dev, &self.test]
    }
}

/// Result of reading one SNLI JSONL file.
#[derive(Debug, Clone)]
pub struct SnliLoad {
    pub split: CorpusSplit,
    /// Records dropped because annotators reached no consensus (`gold_label` is `-`).
    pub excluded: usize,
}

#[derive(Deserialize)]
struct SnliRecord {
    gold_label: String,
    sentence1: String,
    sentence2: String,
    #[serde(rename = "pairID")]
    pair_id: String,
}

#[derive(Deserialize)]
struct GenericRecord {
    id: String,
    premise: String,
    hypothesis: String,
    label: String,
}

#[derive(Serialize)]
struct GenericRecordRef<'a> {
    id: &'a str,
    premise: &'a str,
    hypothesis: &'a str,
    label: Label,
}

/// Yields `(line_number, line)` for non-blank lines; decoding failures name the line.
fn read_lines(path: &Path) -> Result<impl Iterator<Item = Result<(usize, String)>>> {
    let file = File::open(path).map_err(io_err(path))?;
    let path = path.to_path_buf();
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .filter_map(move |(i, line)| {
            let lineno = i + 1;
            match line {
                Ok(l) if l.trim().is_empty() => None,
                Ok(l) => Some(Ok((lineno, l))),
                Err(e) if e.kind() == std::io::ErrorKind::InvalidData => Some(Err(Error::Malformed {
                    path: path.clone(),
                    line: lineno,
                    message: "invalid UTF-8".into(),
                })),
                Err(e) => Some(Err(Error::Io {
                    path: path.clone(),
                    source: e,
                })),
            }
        }))
}

/// Loads one split of the SNLI JSONL distribution, dropping `-` labelled records.
pub fn load_snli(path: impl AsRef<Path>, split_name: SplitName) -> Result<SnliLoad> {
    let path = path.as_ref();
    let mut pairs = Vec::new();
    let mut excluded = 0;
    for item in read_lines(path)? {
        let (line, text) = item?;
        let rec: SnliRecord = serde_json::from_str(&text).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        if rec.gold_label == "-" {
            excluded += 1;
            continue;
        }
        let label = match rec.gold_label.as_str() {
            "entailment" => Label::Entailment,
            "neutral" => Label::Neutral,
            "contradiction" => Label::Contradiction,
            other => {
                return Err(Error::UnknownLabel {
                    path: path.to_path_buf(),
                    line,
                    value: other.to_string(),
                })
            }
        };
        pairs.push(SentencePair {
            id: rec.pair_id,
            premise: rec.sentence1,
            hypothesis: rec.sentence2,
            label,
        });
    }
    Ok(SnliLoad {
        split: CorpusSplit::new(split_name, pairs)?,
        excluded,
    })
}

/// Loads a generic JSONL split with keys `id`, `premise`, `hypothesis`, `label`.
pub fn load_generic(path: impl AsRef<Path>, split_name: SplitName) -> Result<CorpusSplit> {
    let path = path.as_ref();
    let mut pairs = Vec::new();
    for item in read_lines(path)? {
        let (line, text) = item?;
        let rec: GenericRecord = serde_json::from_str(&text).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        let label = Label::parse(&rec.label).ok_or_else(|| Error::UnknownLabel {
            path: path.to_path_buf(),
            line,
            value: rec.label.clone(),
        })?;
        pairs.push(SentencePair {
            id: rec.id,
            premise: rec.premise,
            hypothesis: rec.hypothesis,
            label,
        });
    }
    CorpusSplit::new(split_name, pairs)
}

/// Writes a split in the generic JSONL format, one record per line.
pub fn write_generic_jsonl(split: &CorpusSplit, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    write_generic_jsonl_to(split, &mut out).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

pub fn write_generic_jsonl_to(split: &CorpusSplit, mut out: impl Write) -> std::io::Result<()> {
    for p in split.pairs() {
        let rec = GenericRecordRef {
            id: &p.id,
            premise: &p.premise,
            hypothesis: &p.hypothesis,
            label: p.label,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

const SICK_COLUMNS: [&str; 5] = [
    "pair_ID",
    "sentence_A",
    "sentence_B",
    "entailment_label",
    "SemEval_set",
];

/// Loads the single-file SICK distribution, routing rows by `SemEval_set`
/// (TRAIN, TRIAL and TEST go to train, dev and test).
pub fn load_sick(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let mut lines = read_lines(path)?;
    let mut split_pairs: [Vec<SentencePair>; 3] = Default::default();

    if let Some(header) = lines.next() {
        let (_, header) = header?;
        let header: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
        let mut cols = [0usize; 5];
        for (slot, name) in cols.iter_mut().zip(SICK_COLUMNS) {
            *slot = header
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn {
                    path: path.to_path_buf(),
                    column: name.to_string(),
                })?;
        }
        let [id_col, a_col, b_col, label_col, set_col] = cols;
        let width = cols.iter().copied().max().unwrap_or(0) + 1;

        for item in lines {
            let (line, text) = item?;
            let fields: Vec<&str> = text.trim_end_matches('\r').split('\t').collect();
            if fields.len() < width {
                return Err(Error::Malformed {
                    path: path.to_path_buf(),
                    line,
                    message: format!("expected at least {width} columns, found {}", fields.len()),
                });
            }
            let label = Label::parse(fields[label_col]).ok_or_else(|| Error::UnknownLabel {
                path: path.to_path_buf(),
                line,
                value: fields[label_col].to_string(),
            })?;
            let split = match fields[set_col].trim() {
                "TRAIN" => SplitName::Train,
                "TRIAL" => SplitName::Dev,
                "TEST" => SplitName::Test,
                other => {
                    return Err(Error::UnknownSemEvalSet {
                        path: path.to_path_buf(),
                        line,
                        value: other.to_string(),
                    })
                }
            };
            split_pairs[split as usize].push(SentencePair {
                id: fields[id_col].trim().to_string(),
                premise: fields[a_col].to_string(),
                hypothesis: fields[b_col].to_string(),
                label,
            });
        }
    }

    let [train, dev, test] = split_pairs;
    Ok(Corpus {
        train: CorpusSplit::new(SplitName::Train, train)?,
        dev: CorpusSplit::new(SplitName::Dev, dev)?,
        test: CorpusSplit::new(SplitName::Test, test)?,
        source_format: SourceFormat::SickTsv,
    })
}

/// Expected label counts, `counts[split][label]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceCounts {
    pub name: &'static str,
    pub counts: [[usize; 3]; 3],
}

/// Label counts of the SNLI 1.0 distribution after dropping `-` records.
pub const SNLI_REFERENCE: ReferenceCounts = ReferenceCounts {
    name: "snli",
    counts: [
        [183_416, 182_764, 183_187],
        [3_329, 3_235, 3_278],
        [3_368, 3_219, 3_237],
    ],
};

/// Label counts of the SICK distribution.
pub const SICK_REFERENCE: ReferenceCounts = ReferenceCounts {
    name: "sick",
    counts: [[1_299, 2_536, 665], [144, 282, 74], [1_414, 2_793, 720]],
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCheck {
    pub split: SplitName,
    pub label: Label,
    pub expected: usize,
    pub observed: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub reference: String,
    pub cells: Vec<CellCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("label counts vs {} reference\n", self.reference);
        for c in &self.cells {
            out.push_str(&format!(
                "{:<5} {:<13} expected {:>8} observed {:>8}  {}\n",
                c.split.as_str(),
                c.label.to_string(),
                c.expected,
                c.observed,
                if c.pass { "ok" } else { "MISMATCH" }
            ));
        }
        out.push_str(if self.all_pass() {
            "all cells match\n"
        } else {
            "some cells differ\n"
        });
        out
    }
}

/// Compares each split's label histogram with a reference table.
pub fn validate_counts(corpus: &Corpus, expected: &ReferenceCounts) -> ValidationReport {
    let mut cells = Vec::with_capacity(9);
    for (si, split) in corpus.splits().into_iter().enumerate() {
        let observed = split.label_counts();
        for label in Label::ALL {
            let e = expected.counts[si][label.index()];
            let o = observed[label.index()];
            cells.push(CellCheck {
                split: split.name(),
                label,
                expected: e,
                observed: o,
                pass: e == o,
            });
        }
    }
    ValidationReport {
        reference: expected.name.to_string(),
        cells,
    }
}
