//! Command implementations behind the `routeconf` binary.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use routeconf::{
    evaluate, flat_baseline, generate_synthetic, load_corpus, render_report, split_corpus,
    Calibration, CentroidMode, CentroidModel, ComparisonRow, PolicyKind, Router, SummaryRow,
    SyntheticSpec, Taxonomy, ThresholdChoice, Vocabulary,
};

pub const TAXONOMY_FILE: &str = "taxonomy.tsv";
pub const CORPUS_FILE: &str = "corpus.tsv";
pub const MODEL_FILE: &str = "model.json";
pub const CALIBRATION_FILE: &str = "calibration.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";

#[derive(Debug, Parser)]
#[command(
    name = "routeconf",
    version,
    about = "Hierarchical text categorization with route-confidence rejection"
)]
pub struct Cli {
    /// Worker threads for per-document work (results do not depend on it).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic taxonomy and corpus.
    Generate(GenerateArgs),
    /// Train node centroids and calibrate level weights and the threshold.
    Train(TrainArgs),
    /// Route documents and print accept/reject decisions.
    Classify(ClassifyArgs),
    /// Score the held-out test split and write report CSVs.
    Evaluate(EvaluateArgs),
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1)"))
    }
}

fn threshold_value(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_nan() {
        return Err("threshold is NaN".into());
    }
    Ok(v)
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=32))]
    pub depth: u32,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub branching: u32,
    /// Marker terms per node.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub topic_vocab: u32,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub noise_vocab: u32,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..))]
    pub docs_per_leaf: u32,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub tokens_per_doc: u32,
    /// Share of tokens drawn from the noise vocabulary, in [0, 1).
    #[arg(long, default_value_t = 0.0, value_parser = unit_interval)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

impl GenerateArgs {
    pub fn spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            depth: self.depth as usize,
            branching: self.branching as usize,
            topic_vocab: self.topic_vocab as usize,
            noise_vocab: self.noise_vocab as usize,
            docs_per_leaf: self.docs_per_leaf as usize,
            tokens_per_doc: self.tokens_per_doc as usize,
            noise: self.noise,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 0.2, value_parser = unit_interval)]
    pub val_fraction: f64,
    #[arg(long, default_value_t = 0.3, value_parser = unit_interval)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    /// Fixed acceptance threshold instead of the equal-error-rate point.
    #[arg(long, value_parser = threshold_value, conflicts_with = "accept_all")]
    pub threshold: Option<f64>,
    /// Accept every document.
    #[arg(long)]
    pub accept_all: bool,
}

impl ThresholdArgs {
    pub fn choice(&self) -> ThresholdChoice {
        match (self.threshold, self.accept_all) {
            (Some(tau), _) => ThresholdChoice::Manual(tau),
            (None, true) => ThresholdChoice::AcceptAll,
            (None, false) => ThresholdChoice::Eer,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, default_value = "positive-only")]
    pub mode: CentroidMode,
    /// Training policy for binary mode: exclusive, less-exclusive,
    /// less-inclusive, inclusive, siblings or exclusive-siblings.
    #[arg(long)]
    pub policy: Option<PolicyKind>,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub calibration: PathBuf,
    /// Lines of `doc_id<TAB>text` or `doc_id<TAB>label<TAB>text`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub calibration: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    /// Row label in the reports.
    #[arg(long, default_value = "synthetic")]
    pub problem: String,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn load_taxonomy(path: &Path) -> Result<Taxonomy> {
    Taxonomy::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_model(path: &Path) -> Result<CentroidModel> {
    CentroidModel::from_json(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn load_calibration(path: &Path) -> Result<Calibration> {
    Calibration::from_json(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        // Ignore the error when a pool already exists (repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match cli.command {
        Command::Generate(args) => cmd_generate(&args, out),
        Command::Train(args) => cmd_train(&args, out),
        Command::Classify(args) => cmd_classify(&args, out),
        Command::Evaluate(args) => cmd_evaluate(&args, out),
    }
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let files = generate_synthetic(&args.spec())?;
    ensure_dir(&args.out_dir)?;
    let taxonomy = args.out_dir.join(TAXONOMY_FILE);
    let corpus = args.out_dir.join(CORPUS_FILE);
    write(&taxonomy, &files.taxonomy)?;
    write(&corpus, &files.corpus)?;
    writeln!(out, "wrote {} and {}", taxonomy.display(), corpus.display())?;
    Ok(())
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let t = load_taxonomy(&args.taxonomy)?;
    let docs = load_corpus(&read(&args.corpus)?, &t)
        .with_context(|| format!("parsing {}", args.corpus.display()))?;
    let split = split_corpus(
        &docs,
        args.split.val_fraction,
        args.split.test_fraction,
        args.split.seed,
    )?;
    if args.mode == CentroidMode::Binary && args.policy.is_none() {
        bail!("--mode binary requires --policy");
    }
    let vocabulary = Vocabulary::build(&split.train).context("building vocabulary")?;
    let model = CentroidModel::train(&split.train, &t, vocabulary, args.mode, args.policy)?;
    let router = Router::new(&model, &t)?;
    let calibration = Calibration::fit(&router, &split.validation, args.threshold.choice())?;

    ensure_dir(&args.out_dir)?;
    write(&args.out_dir.join(MODEL_FILE), &model.to_json()?)?;
    write(
        &args.out_dir.join(CALIBRATION_FILE),
        &calibration.to_json()?,
    )?;

    let mut weights = String::new();
    for (k, w) in calibration.level_weights.as_slice().iter().enumerate() {
        write!(weights, " L{}={w:.6}", k + 1)?;
    }
    writeln!(
        out,
        "split: train {} validation {} test {}",
        split.train.len(),
        split.validation.len(),
        split.test.len()
    )?;
    writeln!(out, "level weights:{weights}")?;
    let gap = calibration
        .eer_gap
        .map_or_else(|| "n/a".to_string(), |g| format!("{g:.6}"));
    writeln!(
        out,
        "threshold: {} ({}), EER gap: {gap}",
        calibration.threshold,
        calibration.source.as_str()
    )?;
    Ok(())
}

pub fn cmd_classify(args: &ClassifyArgs, out: &mut dyn Write) -> Result<()> {
    let t = load_taxonomy(&args.taxonomy)?;
    let model = load_model(&args.model)?;
    let calibration = load_calibration(&args.calibration)?.with_threshold(args.threshold.choice());
    let router = Router::new(&model, &t)?;
    if calibration.level_weights.max_depth() < t.max_depth() {
        bail!(
            "calibration has weights for {} levels but the taxonomy has {}",
            calibration.level_weights.max_depth(),
            t.max_depth()
        );
    }

    let input = read(&args.input)?;
    let mut lines = Vec::new();
    for (k, raw) in input.lines().enumerate() {
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let (doc_id, text) = match fields.as_slice() {
            [id, text] | [id, _, text] => (*id, *text),
            _ => bail!(
                "{}: line {}: expected doc_id<TAB>text or doc_id<TAB>label<TAB>text",
                args.input.display(),
                k + 1
            ),
        };
        lines.push((doc_id, text));
    }
    let decisions = lines
        .par_iter()
        .map(|(_, text)| router.classify(&calibration, &model.vocabulary().vectorize_text(text)))
        .collect::<routeconf::Result<Vec<_>>>()?;
    for ((doc_id, _), d) in lines.iter().zip(decisions) {
        let verdict = if d.is_accepted() { "ACCEPT" } else { "REJECT" };
        writeln!(
            out,
            "{doc_id}\t{}\t{:.6}\t{verdict}",
            d.label(),
            d.reliability()
        )?;
    }
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let t = load_taxonomy(&args.taxonomy)?;
    let docs = load_corpus(&read(&args.corpus)?, &t)
        .with_context(|| format!("parsing {}", args.corpus.display()))?;
    let model = load_model(&args.model)?;
    let calibration = load_calibration(&args.calibration)?.with_threshold(args.threshold.choice());
    let split = split_corpus(
        &docs,
        args.split.val_fraction,
        args.split.test_fraction,
        args.split.seed,
    )?;
    if model.vocabulary().n_docs() as usize != split.train.len() {
        bail!(
            "vocabulary mismatch: model was built from {} training documents but this split has {}; \
             use the split flags given to train",
            model.vocabulary().n_docs(),
            split.train.len()
        );
    }
    let router = Router::new(&model, &t)?;
    let summary = evaluate(&router, &calibration, &split.test)?;
    let flat = flat_baseline(&split.train, &split.test, &t, model.vocabulary())?;

    let report = render_report(
        &[SummaryRow::new(&args.problem, &summary)],
        &[ComparisonRow::new(&args.problem, flat, &summary)],
    )?;
    ensure_dir(&args.out_dir)?;
    write(&args.out_dir.join(SUMMARY_FILE), &report.summary_csv)?;
    if let Some(csv) = &report.comparison_csv {
        write(&args.out_dir.join(COMPARISON_FILE), csv)?;
    }
    write!(out, "{}", report.table)?;
    writeln!(
        out,
        "\ntest documents {}, accepted {}, overall accuracy {:.4}, boosted accuracy {:.4}",
        summary.total, summary.accepted, summary.overall_accuracy, summary.boosted_accuracy
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn threshold_flags_map_to_choices() {
        let parse = |extra: &[&str]| {
            let mut args = vec![
                "routeconf",
                "train",
                "--taxonomy",
                "t",
                "--corpus",
                "c",
                "--out-dir",
                "o",
            ];
            args.extend_from_slice(extra);
            match Cli::try_parse_from(args).map(|c| c.command) {
                Ok(Command::Train(a)) => Ok(a.threshold.choice()),
                Ok(_) => unreachable!(),
                Err(e) => Err(e.kind()),
            }
        };
        assert_eq!(parse(&[]), Ok(ThresholdChoice::Eer));
        assert_eq!(
            parse(&["--threshold", "0.25"]),
            Ok(ThresholdChoice::Manual(0.25))
        );
        assert_eq!(parse(&["--accept-all"]), Ok(ThresholdChoice::AcceptAll));
        assert_eq!(
            parse(&["--threshold", "0.2", "--accept-all"]),
            Err(clap::error::ErrorKind::ArgumentConflict)
        );
        assert!(parse(&["--threshold", "NaN"]).is_err());
    }

    #[test]
    fn mode_and_policy_parse() {
        let cli = Cli::try_parse_from([
            "routeconf",
            "train",
            "--taxonomy",
            "t",
            "--corpus",
            "c",
            "--out-dir",
            "o",
            "--mode",
            "binary",
            "--policy",
            "less-inclusive",
        ])
        .unwrap();
        let Command::Train(args) = cli.command else {
            panic!()
        };
        assert_eq!(args.mode, CentroidMode::Binary);
        assert_eq!(args.policy, Some(PolicyKind::LessInclusive));
        assert!(Cli::try_parse_from([
            "routeconf",
            "train",
            "--taxonomy",
            "t",
            "--corpus",
            "c",
            "--out-dir",
            "o",
            "--policy",
            "bogus",
        ])
        .is_err());
    }
}
