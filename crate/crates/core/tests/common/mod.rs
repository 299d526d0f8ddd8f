//! Independent oracles and property checks shared by the integration and acceptance targets.
//!
//! The oracles use exact rational arithmetic and their own token counting so
//! they share no code path with the log-space implementation.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use te_audit::corpus::{CorpusSplit, Label, SentencePair, SourceFormat, SplitName};
use te_audit::features::{build_vocab, featurize, tokenize, Fields, TokenSeq};
use te_audit::nb::train_nb;
use te_audit::partition::{mask_premises, parse_manifest, partition_from_predictions, PartitionManifest};
use te_audit::report::{audit, parse_report, render_report, AuditSettings, ReportFormat};
use te_audit::stattest::{from_counts, log_binom_cdf};
use te_audit::Corpus;

pub const TOY_ALPHABET: [&str; 5] = ["a", "b", "c", "d", "e"];

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn rat(num: u64, den: u64) -> BigRational {
    BigRational::new(big(num), big(den))
}

fn choose(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * big(n - i) / big(i + 1);
    }
    acc
}

/// `P(X <= k)` for `X ~ Binomial(n, 1/2)`, exactly.
pub fn rational_binom_cdf(k: u64, n: u64) -> BigRational {
    let num: BigInt = (0..=k).map(|i| choose(n, i)).sum();
    BigRational::new(num, BigInt::one() << n)
}

/// Exact two-sided sign-test p-value, capped at one.
pub fn rational_sign_p(n_plus: u64, n_minus: u64) -> BigRational {
    let n = n_plus + n_minus;
    if n == 0 {
        return BigRational::one();
    }
    let p = rational_binom_cdf(n_plus.min(n_minus), n) * rat(2, 1);
    if p > BigRational::one() {
        BigRational::one()
    } else {
        p
    }
}

/// Largest |p_impl − p_exact| over every (n+, n−) with n+ + n− <= max_n.
pub fn sign_test_max_deviation(max_n: u64) -> f64 {
    let mut worst = 0.0f64;
    for n in 0..=max_n {
        for n_plus in 0..=n {
            let r = from_counts(n_plus as usize, (n - n_plus) as usize, 0);
            let exact = rational_sign_p(n_plus, n - n_plus).to_f64().unwrap();
            worst = worst.max((r.p_two_sided - exact).abs());
        }
    }
    worst
}

/// Largest |log_binom_cdf − ln(exact cdf)| over 0 <= k <= n <= max_n.
pub fn log_cdf_max_deviation(max_n: u64) -> f64 {
    let mut worst = 0.0f64;
    for n in 0..=max_n {
        for k in 0..=n {
            let got = log_binom_cdf(k as usize, n as usize).unwrap();
            let exact = rational_binom_cdf(k, n).to_f64().unwrap().ln();
            worst = worst.max((got - exact).abs());
        }
    }
    worst
}

/// A small labelled corpus over a five-token alphabet, plus a query bag.
#[derive(Debug, Clone)]
pub struct ToyCorpus {
    /// (label index, hypothesis tokens)
    pub rows: Vec<(usize, Vec<&'static str>)>,
    /// smoothing as numerator / denominator
    pub alpha: (u64, u64),
    pub query: Vec<&'static str>,
}

impl ToyCorpus {
    pub fn alpha_f64(&self) -> f64 {
        self.alpha.0 as f64 / self.alpha.1 as f64
    }

    pub fn split(&self) -> CorpusSplit {
        let pairs = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, (y, toks))| SentencePair {
                id: format!("p{i}"),
                premise: "some premise".into(),
                hypothesis: toks.join(" "),
                label: Label::ALL[*y],
            })
            .collect();
        CorpusSplit::new(SplitName::Train, pairs).unwrap()
    }
}

pub fn toy_corpus() -> impl Strategy<Value = ToyCorpus> {
    let row = (0usize..3, prop::collection::vec(prop::sample::select(&TOY_ALPHABET[..]), 1..6));
    (
        prop::collection::vec(row, 0..18),
        prop::collection::vec(prop::collection::vec(prop::sample::select(&TOY_ALPHABET[..]), 1..6), 3),
        prop::sample::select(vec![(1u64, 1u64), (1, 2), (2, 1), (1, 10)]),
        prop::collection::vec(prop::sample::select(&TOY_ALPHABET[..]), 0..8),
    )
        .prop_map(|(mut rows, seeds, alpha, query)| {
            // every label appears at least once; at most 20 pairs
            for (y, toks) in seeds.into_iter().enumerate() {
                rows.insert(y * (rows.len() / 3), (y, toks));
            }
            ToyCorpus { rows, alpha, query }
        })
}

/// Brute-force multinomial NB: exact rational products, no logs, ordinal tie-break.
pub fn oracle_predict(toy: &ToyCorpus) -> (usize, [BigRational; 3]) {
    let vocab: BTreeSet<&str> = toy.rows.iter().flat_map(|(_, t)| t.iter().copied()).collect();
    let v = vocab.len() as u64;
    let alpha = rat(toy.alpha.0, toy.alpha.1);
    let n = toy.rows.len() as u64;

    let mut scores: [BigRational; 3] = Default::default();
    for (y, score) in scores.iter_mut().enumerate() {
        let docs = toy.rows.iter().filter(|(l, _)| *l == y).count() as u64;
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        let mut total = 0u64;
        for (_, toks) in toy.rows.iter().filter(|(l, _)| *l == y) {
            for t in toks {
                *counts.entry(t).or_default() += 1;
                total += 1;
            }
        }
        let denom = BigRational::from_integer(big(total)) + alpha.clone() * BigRational::from_integer(big(v));
        let mut s = rat(docs, n);
        for q in toy.query.iter().filter(|q| vocab.contains(*q)) {
            let c = counts.get(q).copied().unwrap_or(0);
            s = s * ((BigRational::from_integer(big(c)) + alpha.clone()) / denom.clone());
        }
        *score = s;
    }
    let mut best = 0;
    for y in 1..3 {
        if scores[y] > scores[best] {
            best = y;
        }
    }
    (best, scores)
}

pub fn check_nb_matches_oracle(toy: &ToyCorpus) -> Result<(), TestCaseError> {
    let split = toy.split();
    let vocab = build_vocab(&split, Fields::Hypothesis);
    let model = train_nb(&split, &vocab, toy.alpha_f64()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let pred = model.predict(&featurize(&tokenize(&toy.query.join(" ")), &vocab));
    let (expected, exact) = oracle_predict(toy);
    prop_assert_eq!(pred.label.index(), expected, "scores {:?} vs exact {:?}", pred.log_scores, exact);
    for y in 0..3 {
        let exact_ln = exact[y].to_f64().unwrap().ln();
        prop_assert!((pred.log_scores[y] - exact_ln).abs() < 1e-9);
    }
    Ok(())
}

pub fn check_nb_normalization(toy: &ToyCorpus) -> Result<(), TestCaseError> {
    let split = toy.split();
    let model = train_nb(&split, &build_vocab(&split, Fields::Hypothesis), toy.alpha_f64()).unwrap();
    let prior_mass: f64 = model.class_log_prior().iter().map(|l| l.exp()).sum();
    prop_assert!((prior_mass - 1.0).abs() <= 1e-12, "prior mass {}", prior_mass);
    for label in Label::ALL {
        let ll = model.token_log_likelihood(label);
        prop_assert!(ll.iter().all(|x| x.is_finite()));
        let mass: f64 = ll.iter().map(|l| l.exp()).sum();
        prop_assert!((mass - 1.0).abs() <= 1e-9, "{} mass {}", label, mass);
    }
    Ok(())
}

/// Adding one occurrence of a token shifts every label's score by exactly that
/// token's log-likelihood, and order of tokens never matters.
pub fn check_nb_monotone_and_order_free(toy: &ToyCorpus) -> Result<(), TestCaseError> {
    let split = toy.split();
    let vocab = build_vocab(&split, Fields::Hypothesis);
    let model = train_nb(&split, &vocab, toy.alpha_f64()).unwrap();
    let base = featurize(&tokenize(&toy.query.join(" ")), &vocab);
    let before = model.predict(&base);
    for t in 0..vocab.len() {
        let mut more = base.clone();
        more.add(t, 1);
        let after = model.predict(&more);
        for label in Label::ALL {
            let delta = after.log_scores[label.index()] - before.log_scores[label.index()];
            prop_assert!((delta - model.token_log_likelihood(label)[t]).abs() < 1e-9);
        }
        let best = Label::ALL
            .into_iter()
            .max_by(|a, b| model.token_log_likelihood(*a)[t].total_cmp(&model.token_log_likelihood(*b)[t]))
            .unwrap();
        for other in Label::ALL {
            let gap = model.token_log_likelihood(best)[t] - model.token_log_likelihood(other)[t];
            if gap > 1e-12 {
                let rel_before = before.log_scores[best.index()] - before.log_scores[other.index()];
                let rel_after = after.log_scores[best.index()] - after.log_scores[other.index()];
                prop_assert!(rel_after > rel_before);
            }
        }
    }
    let mut reversed = toy.query.clone();
    reversed.reverse();
    let rev = model.predict_text(&reversed.join(" "));
    let fwd = model.predict_text(&toy.query.join(" "));
    prop_assert_eq!(rev, fwd);
    Ok(())
}

pub fn premise_text() -> impl Strategy<Value = String> {
    "[A-Za-z .,!?'()<>]{0,40}".prop_filter("non-blank", |s| !s.trim().is_empty())
}

pub fn check_mask_idempotent(premises: &[String], symbol: &str) -> Result<(), TestCaseError> {
    let pairs = premises
        .iter()
        .enumerate()
        .map(|(i, p)| SentencePair {
            id: i.to_string(),
            premise: p.clone(),
            hypothesis: "a hypothesis".into(),
            label: Label::Neutral,
        })
        .collect();
    let split = CorpusSplit::new(SplitName::Test, pairs).unwrap();
    let once = mask_premises(&split, symbol).unwrap();
    let twice = mask_premises(&once, symbol).unwrap();
    prop_assert_eq!(&twice, &once);
    for (orig, masked) in split.pairs().iter().zip(once.pairs()) {
        let toks: TokenSeq = tokenize(&masked.premise);
        prop_assert_eq!(toks.len(), tokenize(&orig.premise).len());
        prop_assert!(toks.iter().all(|t| t == symbol));
        prop_assert_eq!(&masked.hypothesis, &orig.hypothesis);
        prop_assert_eq!(&masked.id, &orig.id);
    }
    Ok(())
}

pub fn check_manifest_round_trip(labels: &[(usize, usize)]) -> Result<(), TestCaseError> {
    let pairs: Vec<SentencePair> = labels
        .iter()
        .enumerate()
        .map(|(i, (g, _))| SentencePair {
            id: format!("{i}.jpg#{g}"),
            premise: "p".into(),
            hypothesis: "h".into(),
            label: Label::ALL[*g],
        })
        .collect();
    let split = CorpusSplit::new(SplitName::Test, pairs).unwrap();
    let preds: Vec<Label> = labels.iter().map(|(_, p)| Label::ALL[*p]).collect();
    let manifest = partition_from_predictions(&split, &preds).unwrap();
    let (easy, hard) = parse_manifest(&manifest.render().unwrap()).unwrap();
    let back = PartitionManifest::from_ids(easy, hard, &split).unwrap();
    prop_assert_eq!(&back, &manifest);
    let counts = split.label_counts();
    for l in Label::ALL {
        let c = manifest.per_label_breakdown[l.index()];
        prop_assert_eq!(c.easy + c.hard, counts[l.index()]);
    }
    Ok(())
}

pub fn check_report_round_trip(toy: &ToyCorpus, test_rows: &[(usize, Vec<&'static str>)], noise: f64) -> Result<(), TestCaseError> {
    let test_pairs = test_rows
        .iter()
        .enumerate()
        .map(|(i, (y, toks))| SentencePair {
            id: format!("t{i}"),
            premise: "premise words here".into(),
            hypothesis: toks.join(" "),
            label: Label::ALL[*y],
        })
        .collect();
    let corpus = Corpus {
        train: toy.split(),
        dev: CorpusSplit::empty(SplitName::Dev),
        test: CorpusSplit::new(SplitName::Test, test_pairs).unwrap(),
        source_format: SourceFormat::GenericJsonl,
    };
    let mut outcome = audit("toy", &corpus, AuditSettings::default()).unwrap();
    let r = &mut outcome.report;
    prop_assert_eq!(r.confusion.trace(), r.nb_correct);
    prop_assert_eq!(r.confusion.column_sums(), corpus.test.label_counts());
    prop_assert!((r.confusion.accuracy() - r.nb_accuracy).abs() < 1e-15);
    prop_assert!((r.partition.easy_ratio - r.nb_accuracy).abs() < 1e-15);
    // arbitrary float payloads must survive the JSON trip bit-for-bit
    r.stats.premise_mean_tokens = noise;
    r.sign_test.log10_p = -noise.abs();
    let json = render_report(r, ReportFormat::Json).unwrap();
    prop_assert_eq!(&parse_report(&json).unwrap(), &*r);
    Ok(())
}
