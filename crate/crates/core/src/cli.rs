//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or I/O error. Every command
//! computes all of its outputs before touching `--out`, so a failing run
//! leaves no partial files behind.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{
    load_generic, load_sick, load_snli, validate_counts, write_generic_jsonl_to, Corpus, CorpusSplit, SourceFormat, SplitName,
    SICK_REFERENCE, SNLI_REFERENCE,
};
use crate::error::Error;
use crate::nb::{train_nb, DEFAULT_ALPHA};
use crate::features::{build_vocab, Fields};
use crate::partition::{mask_premises, partition_easy_hard, DEFAULT_UNK_SYMBOL};
use crate::report::{audit, render_report, AuditSettings, ReportFormat, StatsReport, DEFAULT_SIGNIFICANCE_LEVEL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "te-audit", version, about = "Audit entailment corpora for hypothesis-only label bias")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the hypothesis-only model, compare it with the majority baseline, write the report and partition
    Audit(AuditArgs),
    /// Write the easy/hard partition of the test split
    Partition(PartitionArgs),
    /// Replace every premise word of a split with an unknown-word symbol
    Mask(MaskArgs),
    /// Label distributions, token means, vocabulary sizes and OOV ratios
    Stats(StatsArgs),
    /// Compare split label counts with the bundled reference tables
    Validate(ValidateArgs),
    /// Convert the corpus to generic JSONL (train.jsonl, dev.jsonl, test.jsonl)
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Snli,
    Sick,
    Generic,
}

impl FormatArg {
    fn name(self) -> &'static str {
        match self {
            FormatArg::Snli => "snli",
            FormatArg::Sick => "sick",
            FormatArg::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Dev,
    Test,
}

impl From<SplitArg> for SplitName {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => SplitName::Train,
            SplitArg::Dev => SplitName::Dev,
            SplitArg::Test => SplitName::Test,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    #[arg(long, value_enum)]
    pub format: FormatArg,
    #[arg(long, value_name = "PATH")]
    pub train: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub dev: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub test: Option<PathBuf>,
    /// Single-file SICK distribution
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
    /// Corpus name used in reports (defaults to the format name)
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long = "alpha-level", default_value_t = DEFAULT_SIGNIFICANCE_LEVEL)]
    pub alpha_level: f64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long = "unk-symbol", default_value = DEFAULT_UNK_SYMBOL)]
    pub unk_symbol: String,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Training split of another corpus used as the known vocabulary for OOV
    #[arg(long = "reference-train", value_name = "PATH")]
    pub reference_train: Option<PathBuf>,
    #[arg(long = "reference-format", value_enum, default_value = "snli")]
    pub reference_format: FormatArg,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Files to write under the output directory, all produced before any is written.
struct Outputs {
    dir: PathBuf,
    files: Vec<(&'static str, Vec<u8>)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &'static str, contents: impl Into<Vec<u8>>) {
        self.files.push((name, contents.into()));
    }

    fn commit(self) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir).map_err(|source| Error::Io {
            path: self.dir.clone(),
            source,
        })?;
        let mut written = Vec::new();
        for (name, contents) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, contents).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn load_corpus(args: &CorpusArgs) -> CliResult<Corpus> {
    match args.format {
        FormatArg::Sick => {
            if args.train.is_some() || args.dev.is_some() || args.test.is_some() {
                return Err(usage("--format sick takes --file, not --train/--dev/--test"));
            }
            let file = args.file.as_ref().ok_or_else(|| usage("--format sick requires --file"))?;
            Ok(load_sick(file)?)
        }
        FormatArg::Snli | FormatArg::Generic => {
            if args.file.is_some() {
                return Err(usage("--file is only valid with --format sick"));
            }
            let load = |path: &Option<PathBuf>, name: SplitName| -> CliResult<CorpusSplit> {
                match path {
                    None => Ok(CorpusSplit::empty(name)),
                    Some(p) if args.format == FormatArg::Snli => Ok(load_snli(p, name)?.split),
                    Some(p) => Ok(load_generic(p, name)?),
                }
            };
            Ok(Corpus {
                train: load(&args.train, SplitName::Train)?,
                dev: load(&args.dev, SplitName::Dev)?,
                test: load(&args.test, SplitName::Test)?,
                source_format: if args.format == FormatArg::Snli {
                    SourceFormat::SnliJsonl
                } else {
                    SourceFormat::GenericJsonl
                },
            })
        }
    }
}

fn require_splits(args: &CorpusArgs, splits: &[SplitName]) -> CliResult<()> {
    if args.format == FormatArg::Sick {
        return Ok(());
    }
    for s in splits {
        let given = match s {
            SplitName::Train => args.train.is_some(),
            SplitName::Dev => args.dev.is_some(),
            SplitName::Test => args.test.is_some(),
        };
        if !given {
            return Err(usage(format!("this command requires --{s}")));
        }
    }
    Ok(())
}

fn corpus_name(args: &CorpusArgs) -> String {
    args.name.clone().unwrap_or_else(|| args.format.name().to_string())
}

fn check_alpha(alpha: f64, flag: &str) -> CliResult<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("{flag} must be a positive number")))
    }
}

fn cmd_audit(args: &AuditArgs, stdout: &mut dyn Write) -> CliResult<()> {
    require_splits(&args.corpus, &[SplitName::Train, SplitName::Test])?;
    check_alpha(args.alpha, "--alpha")?;
    if !(args.alpha_level > 0.0 && args.alpha_level < 1.0) {
        return Err(usage("--alpha-level must lie in (0, 1)"));
    }
    let corpus = load_corpus(&args.corpus)?;
    let outcome = audit(
        &corpus_name(&args.corpus),
        &corpus,
        AuditSettings {
            alpha: args.alpha,
            significance_level: args.alpha_level,
        },
    )?;
    let text = render_report(&outcome.report, ReportFormat::Text)?;
    let mut out = Outputs::new(&args.out);
    out.add("report.json", render_report(&outcome.report, ReportFormat::Json)?);
    out.add("report.txt", text.clone());
    out.add("partition.txt", outcome.manifest.render()?);
    out.add("model.json", outcome.model.to_json()?);
    out.commit()?;
    let _ = stdout.write_all(text.as_bytes());
    Ok(())
}

fn cmd_partition(args: &PartitionArgs, stdout: &mut dyn Write) -> CliResult<()> {
    require_splits(&args.corpus, &[SplitName::Train, SplitName::Test])?;
    check_alpha(args.alpha, "--alpha")?;
    let corpus = load_corpus(&args.corpus)?;
    let vocab = build_vocab(&corpus.train, Fields::Hypothesis);
    let model = train_nb(&corpus.train, &vocab, args.alpha)?;
    let manifest = partition_easy_hard(&model, &corpus.test);
    let mut out = Outputs::new(&args.out);
    out.add("partition.txt", manifest.render()?);
    out.commit()?;
    let _ = writeln!(
        stdout,
        "easy {} ({:.1}%), hard {} ({:.1}%)",
        manifest.easy_ids.len(),
        100.0 * manifest.easy_ratio(),
        manifest.hard_ids.len(),
        100.0 * (1.0 - manifest.easy_ratio()),
    );
    Ok(())
}

fn cmd_mask(args: &MaskArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let split_name = SplitName::from(args.split);
    require_splits(&args.corpus, &[split_name])?;
    if crate::features::tokenize(&args.unk_symbol).tokens() != [args.unk_symbol.as_str()] {
        return Err(usage(format!(
            "--unk-symbol {:?} must be a single lowercase token without surrounding punctuation",
            args.unk_symbol
        )));
    }
    let corpus = load_corpus(&args.corpus)?;
    let masked = mask_premises(corpus.split(split_name), &args.unk_symbol)?;
    let mut out = Outputs::new(&args.out);
    out.add("masked.jsonl", jsonl_bytes(&masked));
    out.commit()?;
    let _ = writeln!(stdout, "masked {} pairs of the {} split", masked.len(), split_name);
    Ok(())
}

fn jsonl_bytes(split: &CorpusSplit) -> Vec<u8> {
    let mut buf = Vec::new();
    write_generic_jsonl_to(split, &mut buf).expect("in-memory write");
    buf
}

fn cmd_stats(args: &StatsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let corpus = load_corpus(&args.corpus)?;
    let reference = match &args.reference_train {
        None => None,
        Some(path) => Some(match args.reference_format {
            FormatArg::Snli => load_snli(path, SplitName::Train)?.split,
            FormatArg::Generic => load_generic(path, SplitName::Train)?,
            FormatArg::Sick => load_sick(path)?.train,
        }),
    };
    let report = StatsReport::build(
        &corpus_name(&args.corpus),
        &corpus,
        reference.as_ref().map(|r| (args.reference_format.name(), r)),
    );
    let text = report.render_text();
    if let Some(dir) = &args.out {
        let mut out = Outputs::new(dir);
        let mut json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        json.push('\n');
        out.add("stats.json", json);
        out.commit()?;
    }
    let _ = stdout.write_all(text.as_bytes());
    Ok(())
}

fn cmd_validate(args: &ValidateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let reference = match args.corpus.format {
        FormatArg::Snli => &SNLI_REFERENCE,
        FormatArg::Sick => &SICK_REFERENCE,
        FormatArg::Generic => return Err(usage("no bundled reference counts for --format generic")),
    };
    let corpus = load_corpus(&args.corpus)?;
    let report = validate_counts(&corpus, reference);
    if let Some(dir) = &args.out {
        let mut out = Outputs::new(dir);
        let mut json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        json.push('\n');
        out.add("validation.json", json);
        out.commit()?;
    }
    let _ = stdout.write_all(report.render_text().as_bytes());
    Ok(())
}

fn cmd_export(args: &ExportArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let corpus = load_corpus(&args.corpus)?;
    let mut out = Outputs::new(&args.out);
    for (name, split) in [("train.jsonl", &corpus.train), ("dev.jsonl", &corpus.dev), ("test.jsonl", &corpus.test)] {
        out.add(name, jsonl_bytes(split));
    }
    out.commit()?;
    let _ = writeln!(
        stdout,
        "exported train {} / dev {} / test {}",
        corpus.train.len(),
        corpus.dev.len(),
        corpus.test.len()
    );
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Audit(a) => cmd_audit(a, stdout),
        Command::Partition(a) => cmd_partition(a, stdout),
        Command::Mask(a) => cmd_mask(a, stdout),
        Command::Stats(a) => cmd_stats(a, stdout),
        Command::Validate(a) => cmd_validate(a, stdout),
        Command::Export(a) => cmd_export(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}
