//! Hypothesis-only bias auditing for textual entailment corpora.
//!
//! A multinomial naive Bayes model that sees only hypothesis sentences is
//! compared against a majority-label baseline with an exact sign test. If the
//! hypothesis-only model wins significantly, labels leak through the
//! hypotheses and the corpus is reported as biased. The same model splits the
//! test set into an easy part (labels it recovers) and a hard part.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod features;
pub mod nb;
pub mod partition;
pub mod report;
pub mod stattest;

pub use corpus::{Corpus, CorpusSplit, Label, SentencePair, SplitName};
pub use error::{Error, Result};
pub use nb::{BaselineModel, NbModel};
pub use partition::PartitionManifest;
pub use report::{AuditReport, Verdict};
pub use stattest::SignTestResult;
