//! Confusion matrices, descriptive corpus statistics, and the audit report.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusSplit, Label};
use crate::error::{Error, Result};
use crate::features::{build_vocab, tokenize, Fields, Vocabulary};
use crate::nb::{train_baseline, train_nb, NbModel};
use crate::partition::{partition_from_predictions, PartitionManifest, SubsetCounts};
use crate::stattest::{sign_test, SignTestResult};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SIGNIFICANCE_LEVEL: f64 = 0.01;

/// 3×3 counts with rows = predicted label and columns = gold label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
}

impl ConfusionMatrix {
    pub fn get(&self, predicted: Label, gold: Label) -> usize {
        self.counts[predicted.index()][gold.index()]
    }

    pub fn row(&self, predicted: Label) -> [usize; 3] {
        self.counts[predicted.index()]
    }

    pub fn column_sums(&self) -> [usize; 3] {
        let mut sums = [0; 3];
        for row in &self.counts {
            for (s, c) in sums.iter_mut().zip(row) {
                *s += c;
            }
        }
        sums
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.trace(), self.total())
    }
}

pub fn confusion(predictions: &[Label], gold: &[Label]) -> Result<ConfusionMatrix> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    let mut m = ConfusionMatrix::default();
    for (p, g) in predictions.iter().zip(gold) {
        m.counts[p.index()][g.index()] += 1;
    }
    Ok(m)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub premise_mean_tokens: f64,
    pub hypothesis_mean_tokens: f64,
    pub vocab_size_train: usize,
    pub vocab_size_test: usize,
    /// Share of test token occurrences whose type is not in the train vocabulary.
    pub oov_ratio_test: f64,
    /// Share of distinct test types not in the train vocabulary.
    pub oov_type_ratio_test: f64,
}

/// Token means pool every split; vocabularies cover both sentences of each pair.
pub fn descriptive_stats(corpus: &Corpus) -> DescriptiveStats {
    let (mut n, mut premise_tokens, mut hypothesis_tokens) = (0usize, 0usize, 0usize);
    for split in corpus.splits() {
        for p in split.pairs() {
            n += 1;
            premise_tokens += tokenize(&p.premise).len();
            hypothesis_tokens += tokenize(&p.hypothesis).len();
        }
    }
    let train_vocab = build_vocab(&corpus.train, Fields::Both);
    let test_vocab = build_vocab(&corpus.test, Fields::Both);
    DescriptiveStats {
        premise_mean_tokens: ratio(premise_tokens, n),
        hypothesis_mean_tokens: ratio(hypothesis_tokens, n),
        vocab_size_train: train_vocab.len(),
        vocab_size_test: test_vocab.len(),
        oov_ratio_test: token_oov_ratio(&corpus.test, &train_vocab),
        oov_type_ratio_test: type_oov_ratio(&test_vocab, &train_vocab),
    }
}

fn token_oov_ratio(test: &CorpusSplit, known: &Vocabulary) -> f64 {
    let (mut total, mut oov) = (0usize, 0usize);
    for p in test.pairs() {
        for text in Fields::Both.texts(p) {
            for tok in tokenize(text).iter() {
                total += 1;
                if !known.contains(tok) {
                    oov += 1;
                }
            }
        }
    }
    ratio(oov, total)
}

fn type_oov_ratio(test_vocab: &Vocabulary, known: &Vocabulary) -> f64 {
    let oov = test_vocab.tokens().iter().filter(|t| !known.contains(t)).count();
    ratio(oov, test_vocab.len())
}

/// Token-level OOV ratio of `test_split` against the vocabulary of `reference_train`.
pub fn cross_corpus_oov(test_split: &CorpusSplit, reference_train: &CorpusSplit) -> f64 {
    token_oov_ratio(test_split, &build_vocab(reference_train, Fields::Both))
}

/// Type-level counterpart of [`cross_corpus_oov`].
pub fn cross_corpus_type_oov(test_split: &CorpusSplit, reference_train: &CorpusSplit) -> f64 {
    type_oov_ratio(
        &build_vocab(test_split, Fields::Both),
        &build_vocab(reference_train, Fields::Both),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Biased,
    NotBiased,
}

impl Verdict {
    /// Biased iff the NB model is significantly better than the baseline.
    pub fn decide(sign: &SignTestResult, significance_level: f64, nb_accuracy: f64, baseline_accuracy: f64) -> Self {
        if sign.p_two_sided < significance_level && nb_accuracy > baseline_accuracy {
            Verdict::Biased
        } else {
            Verdict::NotBiased
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Biased => "biased",
            Verdict::NotBiased => "not-biased",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub easy: usize,
    pub hard: usize,
    pub easy_ratio: f64,
    pub easy_majority_share: f64,
    pub per_label: [SubsetCounts; 3],
}

impl From<&PartitionManifest> for PartitionSummary {
    fn from(m: &PartitionManifest) -> Self {
        PartitionSummary {
            easy: m.easy_ids.len(),
            hard: m.hard_ids.len(),
            easy_ratio: m.easy_ratio(),
            easy_majority_share: m.easy_majority_share(),
            per_label: m.per_label_breakdown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub corpus: String,
    pub alpha: f64,
    pub significance_level: f64,
    pub n_test: usize,
    pub nb_correct: usize,
    pub baseline_correct: usize,
    pub nb_accuracy: f64,
    pub baseline_accuracy: f64,
    pub baseline_label: Label,
    pub sign_test: SignTestResult,
    pub confusion: ConfusionMatrix,
    pub partition: PartitionSummary,
    pub stats: DescriptiveStats,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSettings {
    pub alpha: f64,
    pub significance_level: f64,
}

impl Default for AuditSettings {
    fn default() -> Self {
        AuditSettings {
            alpha: crate::nb::DEFAULT_ALPHA,
            significance_level: DEFAULT_SIGNIFICANCE_LEVEL,
        }
    }
}

/// Everything one audit run produces.
#[derive(Debug, Clone)]
pub struct AuditOutcome {
    pub report: AuditReport,
    pub manifest: PartitionManifest,
    pub model: NbModel,
    pub nb_predictions: Vec<Label>,
}

/// Trains the hypothesis-only model and the majority baseline on `corpus.train`,
/// evaluates both on `corpus.test`, and compares them with the sign test.
pub fn audit(corpus_id: &str, corpus: &Corpus, settings: AuditSettings) -> Result<AuditOutcome> {
    let (train, test) = (&corpus.train, &corpus.test);
    if test.is_empty() {
        return Err(Error::EmptySplit);
    }
    let vocab = build_vocab(train, Fields::Hypothesis);
    let model = train_nb(train, &vocab, settings.alpha)?;
    let baseline = train_baseline(train)?;

    let gold: Vec<Label> = test.labels().collect();
    let nb_predictions = model.predict_split(test);
    let baseline_predictions = baseline.predict_split(test);
    let nb_ok: Vec<bool> = nb_predictions.iter().zip(&gold).map(|(p, g)| p == g).collect();
    let base_ok: Vec<bool> = baseline_predictions.iter().zip(&gold).map(|(p, g)| p == g).collect();
    let nb_correct = nb_ok.iter().filter(|&&c| c).count();
    let baseline_correct = base_ok.iter().filter(|&&c| c).count();

    let sign = sign_test(&nb_ok, &base_ok)?;
    let conf = confusion(&nb_predictions, &gold)?;
    let manifest = partition_from_predictions(test, &nb_predictions)?;
    let nb_accuracy = ratio(nb_correct, test.len());
    let baseline_accuracy = ratio(baseline_correct, test.len());

    let report = AuditReport {
        schema_version: REPORT_SCHEMA_VERSION,
        corpus: corpus_id.to_string(),
        alpha: settings.alpha,
        significance_level: settings.significance_level,
        n_test: test.len(),
        nb_correct,
        baseline_correct,
        nb_accuracy,
        baseline_accuracy,
        baseline_label: baseline.majority,
        sign_test: sign,
        confusion: conf,
        partition: PartitionSummary::from(&manifest),
        stats: descriptive_stats(corpus),
        verdict: Verdict::decide(&sign, settings.significance_level, nb_accuracy, baseline_accuracy),
    };
    Ok(AuditOutcome {
        report,
        manifest,
        model,
        nb_predictions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

pub fn render_report(report: &AuditReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Text => Ok(render_text(report)),
    }
}

pub fn parse_report(json: &str) -> Result<AuditReport> {
    let report: AuditReport = serde_json::from_str(json)?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: report.schema_version,
            expected: REPORT_SCHEMA_VERSION,
        });
    }
    Ok(report)
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

fn render_text(r: &AuditReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Hypothesis-only bias audit: {}", r.corpus);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<10} {:>22} {:>16}", "Corpus", "TE label prediction", "Baseline");
    let _ = writeln!(
        out,
        "{:<10} {:>22} {:>16}",
        r.corpus,
        format!("{} ({}/{})", pct(r.nb_accuracy), r.nb_correct, r.n_test),
        format!("{} ({})", pct(r.baseline_accuracy), r.baseline_label.as_str()),
    );
    let _ = writeln!(out);
    let s = &r.sign_test;
    let _ = writeln!(
        out,
        "Sign test: n+ = {}, n- = {}, ties = {}, p = {:.3e} (log10 p = {:.2})",
        s.n_plus, s.n_minus, s.n_tie, s.p_two_sided, s.log10_p
    );
    let _ = writeln!(
        out,
        "Verdict at significance {}: {}",
        r.significance_level,
        r.verdict.as_str()
    );
    let _ = writeln!(out);

    let p = &r.partition;
    let _ = writeln!(out, "Empirical partition");
    let _ = writeln!(out, "{:<14} {:>18} {:>18}", "", "easy", "hard");
    for label in Label::ALL {
        let c = p.per_label[label.index()];
        let _ = writeln!(
            out,
            "{:<14} {:>18} {:>18}",
            label.to_string(),
            format!("{} ({})", c.easy, pct(ratio(c.easy, p.easy))),
            format!("{} ({})", c.hard, pct(ratio(c.hard, p.hard))),
        );
    }
    let total = p.easy + p.hard;
    let _ = writeln!(
        out,
        "{:<14} {:>18} {:>18}",
        "Total",
        format!("{} ({})", p.easy, pct(ratio(p.easy, total))),
        format!("{} ({})", p.hard, pct(ratio(p.hard, total))),
    );
    let _ = writeln!(out, "Majority-label share of easy subset: {}", pct(p.easy_majority_share));
    let _ = writeln!(out);

    let _ = writeln!(out, "Confusion matrix (rows predicted, columns gold)");
    let _ = writeln!(
        out,
        "{:<14} {:>13} {:>13} {:>13}",
        "", "Entailment", "Neutral", "Contradiction"
    );
    for label in Label::ALL {
        let row = r.confusion.row(label);
        let _ = writeln!(
            out,
            "{:<14} {:>13} {:>13} {:>13}",
            label.to_string(),
            row[0],
            row[1],
            row[2]
        );
    }
    let _ = writeln!(out);

    let st = &r.stats;
    let _ = writeln!(out, "Premise mean token count     {:.1}", st.premise_mean_tokens);
    let _ = writeln!(out, "Hypothesis mean token count  {:.1}", st.hypothesis_mean_tokens);
    let _ = writeln!(out, "Vocabulary size (train)      {}", st.vocab_size_train);
    let _ = writeln!(out, "Vocabulary size (test)       {}", st.vocab_size_test);
    let _ = writeln!(
        out,
        "OOV ratio of test (tokens)   {:.2}%",
        100.0 * st.oov_ratio_test
    );
    let _ = writeln!(
        out,
        "OOV ratio of test (types)    {:.2}%",
        100.0 * st.oov_type_ratio_test
    );
    out
}

/// Per-split label histogram with shares, for the `stats` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution {
    pub split: crate::corpus::SplitName,
    pub counts: [usize; 3],
    pub total: usize,
    pub shares: [f64; 3],
}

pub fn label_distributions(corpus: &Corpus) -> Vec<LabelDistribution> {
    corpus
        .splits()
        .into_iter()
        .map(|s| {
            let counts = s.label_counts();
            LabelDistribution {
                split: s.name(),
                counts,
                total: s.len(),
                shares: counts.map(|c| ratio(c, s.len())),
            }
        })
        .collect()
}

/// Output of the `stats` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub schema_version: u32,
    pub corpus: String,
    pub labels: Vec<LabelDistribution>,
    pub stats: DescriptiveStats,
    pub cross_corpus_oov: Option<CrossCorpusOov>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCorpusOov {
    pub reference: String,
    pub token_ratio: f64,
    pub type_ratio: f64,
}

impl StatsReport {
    pub fn build(corpus_id: &str, corpus: &Corpus, reference: Option<(&str, &CorpusSplit)>) -> Self {
        StatsReport {
            schema_version: REPORT_SCHEMA_VERSION,
            corpus: corpus_id.to_string(),
            labels: label_distributions(corpus),
            stats: descriptive_stats(corpus),
            cross_corpus_oov: reference.map(|(name, train)| CrossCorpusOov {
                reference: name.to_string(),
                token_ratio: cross_corpus_oov(&corpus.test, train),
                type_ratio: cross_corpus_type_oov(&corpus.test, train),
            }),
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Label statistics: {}", self.corpus);
        let _ = writeln!(
            out,
            "{:<14} {:>18} {:>18} {:>18}",
            "", "train", "dev", "test"
        );
        for label in Label::ALL {
            let _ = write!(out, "{:<14}", label.to_string());
            for d in &self.labels {
                let _ = write!(
                    out,
                    " {:>18}",
                    format!("{} ({})", d.counts[label.index()], pct(d.shares[label.index()]))
                );
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<14}", "Total");
        for d in &self.labels {
            let _ = write!(out, " {:>18}", d.total);
        }
        out.push('\n');
        out.push('\n');
        let st = &self.stats;
        let _ = writeln!(out, "Premise mean token count     {:.2}", st.premise_mean_tokens);
        let _ = writeln!(out, "Hypothesis mean token count  {:.2}", st.hypothesis_mean_tokens);
        let _ = writeln!(out, "Vocabulary size (train)      {}", st.vocab_size_train);
        let _ = writeln!(out, "Vocabulary size (test)       {}", st.vocab_size_test);
        let _ = writeln!(out, "OOV ratio of test (tokens)   {:.2}%", 100.0 * st.oov_ratio_test);
        let _ = writeln!(out, "OOV ratio of test (types)    {:.2}%", 100.0 * st.oov_type_ratio_test);
        if let Some(x) = &self.cross_corpus_oov {
            let _ = writeln!(
                out,
                "OOV ratio of test vs {} train: {:.2}% tokens, {:.2}% types",
                x.reference,
                100.0 * x.token_ratio,
                100.0 * x.type_ratio
            );
        }
        out
    }
}
