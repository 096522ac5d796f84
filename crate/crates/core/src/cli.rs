//! The `proplab` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.
//! Settings come from an optional TOML file (`--config`); flags override it.
//! Relative paths inside the file are resolved against the file's directory.
//!
//! ```toml
//! seed = 7
//! condition = "embed+emotion"
//!
//! [paths]
//! articles = "data/train-articles"
//! labels = "data/train-labels.tsv"
//! emotion_lexicon = "lexicons/emotion.tsv"
//! features = "cache/train.jsonl"
//!
//! [features]
//! dim = 1024
//! context = true
//!
//! [model]
//! learning_rate = 1e-4
//! max_epochs = 100
//!
//! [endpoint]
//! url = "http://localhost:8080/score"
//! requests_per_second = 2.0
//! ```

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::category::CategoryLexicon;
use crate::corpus::{
    extract_labeled_spans, load_annotation_rows, load_annotations, load_corpus, span_byte_range,
    write_annotations, LabeledSpan, TechniqueLabel, DEFAULT_CONTEXT_WINDOW,
};
use crate::embeddings::{EmbeddingProvider, EmbeddingStore, DEFAULT_DIM};
use crate::emotion::{EmotionLexicon, EmotionProvider, PrecomputedEmotionStore};
use crate::error::{read_text, write_text, Error, Result};
use crate::eval::{format_comparison, per_technique_f1};
use crate::features::{Condition, FeatureSet, Featurizer};
use crate::net::{load_checkpoint, save_checkpoint, ModelConfig};
use crate::pipeline::{gold_rows, predict_set, train_condition};
use crate::score_client::{failure_sidecar, fetch_scores, EndpointConfig};
use crate::stats::correlation_table;

pub const SEED_ENV: &str = "PROPLAB_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "proplab",
    version,
    about = "Propaganda technique classification with emotion features"
)]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for splits, initialization and dropout
    #[arg(long, global = true, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check annotations against the corpus and print the label distribution
    Validate(CorpusArgs),
    /// Kendall tau-b table between techniques and emotion dimensions
    Analyze {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        emotion: EmotionArgs,
        /// Write the table as TSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute and cache feature bundles for every annotated span
    Featurize {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        emotion: EmotionArgs,
        /// Precomputed embedding file; the hashing embedder is used otherwise
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Hashing embedder dimension
        #[arg(long)]
        dim: Option<usize>,
        /// Category dictionary
        #[arg(long)]
        dictionary: Option<PathBuf>,
        /// Also store context-window embeddings
        #[arg(long)]
        context: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one condition on a feature cache
    Train {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        condition: Option<Condition>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Training log TSV; defaults to `<checkpoint>.log.tsv`
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        max_epochs: Option<usize>,
    },
    /// Write predictions for a feature cache
    Predict {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against gold labels
    Evaluate {
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Second predictions file shown side by side
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Write the report as TSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and evaluate several conditions
    Ablate {
        #[arg(long)]
        features: Option<PathBuf>,
        /// Held-out feature cache; defaults to the training cache
        #[arg(long)]
        eval_features: Option<PathBuf>,
        /// Comma-separated condition names
        #[arg(long, value_delimiter = ',')]
        conditions: Vec<Condition>,
        #[arg(long)]
        max_epochs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fetch emotion scores from an HTTP scoring endpoint
    FetchScores {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        url: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Default)]
pub struct CorpusArgs {
    /// Directory of article<id>.txt files
    #[arg(long)]
    pub articles: Option<PathBuf>,
    /// Annotation TSV
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub context_window: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct EmotionArgs {
    /// Emotion lexicon TSV
    #[arg(long)]
    pub emotion_lexicon: Option<PathBuf>,
    /// Precomputed per-segment emotion scores TSV
    #[arg(long)]
    pub emotion_scores: Option<PathBuf>,
    /// Score segments missing from --emotion-scores with --emotion-lexicon
    #[arg(long)]
    pub emotion_fallback: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub articles: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub emotion_lexicon: Option<PathBuf>,
    pub emotion_scores: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub eval_features: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl PathsConfig {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.articles,
            &mut self.labels,
            &mut self.emotion_lexicon,
            &mut self.emotion_scores,
            &mut self.embeddings,
            &mut self.dictionary,
            &mut self.features,
            &mut self.eval_features,
            &mut self.checkpoint,
            &mut self.predictions,
            &mut self.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureOptions {
    pub dim: Option<usize>,
    pub context: Option<bool>,
    pub context_window: Option<usize>,
    pub emotion_fallback: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub condition: Option<Condition>,
    pub conditions: Vec<Condition>,
    pub paths: PathsConfig,
    pub features: FeatureOptions,
    pub model: ModelConfig,
    pub endpoint: Option<EndpointConfig>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&read_text(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.paths.resolve(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }
}

/// Command failure, split by exit code.
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Usage(m),
            other => Failure::Data(other),
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn required<T: Clone>(
    flag: &Option<T>,
    config: &Option<T>,
    name: &str,
) -> std::result::Result<T, Failure> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| Failure::Usage(format!("--{name} is required (flag or config file)")))
}

struct Ctx<'a> {
    cfg: RunConfig,
    seed: u64,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn model_config(&self, max_epochs: Option<usize>) -> ModelConfig {
        let mut m = self.cfg.model.clone();
        m.seed = self.seed;
        if let Some(e) = max_epochs {
            m.max_epochs = e;
        }
        m
    }

    fn spans(&self, args: &CorpusArgs) -> std::result::Result<Vec<LabeledSpan>, Failure> {
        let articles = load_corpus(&required(
            &args.articles,
            &self.cfg.paths.articles,
            "articles",
        )?)?;
        let labels = load_annotations(&required(&args.labels, &self.cfg.paths.labels, "labels")?)?;
        let window = args
            .context_window
            .or(self.cfg.features.context_window)
            .unwrap_or(DEFAULT_CONTEXT_WINDOW);
        Ok(extract_labeled_spans(&articles, &labels, window)?)
    }

    fn emotion_provider(
        &self,
        args: &EmotionArgs,
    ) -> std::result::Result<EmotionProvider, Failure> {
        let lexicon_path = args
            .emotion_lexicon
            .clone()
            .or(self.cfg.paths.emotion_lexicon.clone());
        let scores_path = args
            .emotion_scores
            .clone()
            .or(self.cfg.paths.emotion_scores.clone());
        let fallback = args.emotion_fallback || self.cfg.features.emotion_fallback.unwrap_or(false);
        match (scores_path, lexicon_path) {
            (Some(scores), lex) => {
                let store = PrecomputedEmotionStore::load(&scores)?;
                let fallback = match (fallback, lex) {
                    (true, Some(l)) => Some(EmotionLexicon::load(&l)?),
                    (true, None) => {
                        return Err(Failure::Usage(
                            "--emotion-fallback needs --emotion-lexicon".into(),
                        ))
                    }
                    (false, _) => None,
                };
                Ok(EmotionProvider::Precomputed { store, fallback })
            }
            (None, Some(lex)) => Ok(EmotionProvider::Lexicon(EmotionLexicon::load(&lex)?)),
            (None, None) => Err(Failure::Usage(
                "an emotion provider is required: --emotion-lexicon or --emotion-scores".into(),
            )),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> CmdResult {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let mut ctx = Ctx { cfg, seed, out };
    match cli.command {
        Command::Validate(args) => cmd_validate(&mut ctx, &args),
        Command::Analyze {
            corpus,
            emotion,
            out,
        } => cmd_analyze(&mut ctx, &corpus, &emotion, out),
        Command::Featurize {
            corpus,
            emotion,
            embeddings,
            dim,
            dictionary,
            context,
            out,
        } => cmd_featurize(
            &mut ctx, &corpus, &emotion, embeddings, dim, dictionary, context, out,
        ),
        Command::Train {
            features,
            condition,
            checkpoint,
            log,
            max_epochs,
        } => cmd_train(&mut ctx, features, condition, checkpoint, log, max_epochs),
        Command::Predict {
            features,
            checkpoint,
            out,
        } => cmd_predict(&mut ctx, features, checkpoint, out),
        Command::Evaluate {
            labels,
            predictions,
            baseline,
            out,
        } => cmd_evaluate(&mut ctx, labels, predictions, baseline, out),
        Command::Ablate {
            features,
            eval_features,
            conditions,
            max_epochs,
            out,
        } => cmd_ablate(
            &mut ctx,
            features,
            eval_features,
            conditions,
            max_epochs,
            out,
        ),
        Command::FetchScores { corpus, url, out } => cmd_fetch_scores(&mut ctx, &corpus, url, out),
    }
}

fn cmd_validate(ctx: &mut Ctx, args: &CorpusArgs) -> CmdResult {
    let articles = load_corpus(&required(
        &args.articles,
        &ctx.cfg.paths.articles,
        "articles",
    )?)?;
    let rows = load_annotation_rows(&required(&args.labels, &ctx.cfg.paths.labels, "labels")?)?;
    let by_id: HashMap<u64, _> = articles.iter().map(|a| (a.id, a)).collect();
    let mut problems = Vec::new();
    let mut first_line: HashMap<_, usize> = HashMap::new();
    let mut counts = [0usize; TechniqueLabel::COUNT];
    for row in &rows {
        let ann = &row.annotation;
        let Some(article) = by_id.get(&ann.article_id) else {
            problems.push(format!(
                "line {}: article {} not found in corpus",
                row.line, ann.article_id
            ));
            continue;
        };
        if let Err(e) = span_byte_range(article, ann) {
            problems.push(format!("line {}: {e}", row.line));
            continue;
        }
        if let Some(prev) = first_line.insert(*ann, row.line) {
            problems.push(format!("line {}: duplicate of line {prev}", row.line));
            first_line.insert(*ann, prev);
            continue;
        }
        counts[ann.technique.index()] += 1;
    }

    let total: usize = counts.iter().sum();
    let w = TechniqueLabel::ALL
        .iter()
        .map(|t| t.name().len())
        .max()
        .unwrap_or(0);
    let o = &mut ctx.out;
    let _ = writeln!(
        o,
        "{} articles, {} annotation rows",
        articles.len(),
        rows.len()
    );
    let _ = writeln!(
        o,
        "{:<w$}  {:>6}  {:>7}",
        "Propaganda technique", "count", "percent"
    );
    for t in TechniqueLabel::ALL {
        let c = counts[t.index()];
        let pct = if total == 0 {
            0.0
        } else {
            100.0 * c as f64 / total as f64
        };
        let _ = writeln!(o, "{:<w$}  {:>6}  {:>6.2}%", t.name(), c, pct);
    }
    let _ = writeln!(
        o,
        "{:<w$}  {:>6}  {:>6.2}%",
        "total",
        total,
        if total == 0 { 0.0 } else { 100.0 }
    );
    if problems.is_empty() {
        Ok(0)
    } else {
        let summary: Vec<String> = problems.iter().map(|p| format!("  {p}")).collect();
        Err(Failure::Data(Error::Eval(format!(
            "{} invalid annotation rows:\n{}",
            problems.len(),
            summary.join("\n")
        ))))
    }
}

fn cmd_analyze(
    ctx: &mut Ctx,
    corpus: &CorpusArgs,
    emotion: &EmotionArgs,
    out: Option<PathBuf>,
) -> CmdResult {
    let spans = ctx.spans(corpus)?;
    let provider = ctx.emotion_provider(emotion)?;
    let scores = spans
        .iter()
        .map(|s| provider.get_scores(&s.segment))
        .collect::<Result<Vec<_>>>()?;
    let table = correlation_table(&spans, &scores)?;
    let _ = write!(ctx.out, "{}", table.to_text());
    if let Some(path) = out.or(ctx.cfg.paths.out.clone()) {
        write_text(&path, &table.to_tsv())?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_featurize(
    ctx: &mut Ctx,
    corpus: &CorpusArgs,
    emotion: &EmotionArgs,
    embeddings: Option<PathBuf>,
    dim: Option<usize>,
    dictionary: Option<PathBuf>,
    context: bool,
    out: Option<PathBuf>,
) -> CmdResult {
    let out = required(&out, &ctx.cfg.paths.features, "out")?;
    let spans = ctx.spans(corpus)?;
    let embedding = match embeddings.or(ctx.cfg.paths.embeddings.clone()) {
        Some(p) => EmbeddingProvider::Store(EmbeddingStore::load(&p)?),
        None => {
            let dim = dim.or(ctx.cfg.features.dim).unwrap_or(DEFAULT_DIM);
            if dim == 0 {
                return Err(Failure::Usage("--dim must be positive".into()));
            }
            EmbeddingProvider::Hash { dim }
        }
    };
    let category = match dictionary.or(ctx.cfg.paths.dictionary.clone()) {
        Some(p) => Some(CategoryLexicon::load(&p)?),
        None => None,
    };
    let featurizer = Featurizer {
        embedding,
        emotion: ctx.emotion_provider(emotion)?,
        category,
        with_context: context || ctx.cfg.features.context.unwrap_or(false),
    };
    let set = featurizer.featurize(&spans)?;
    set.save(&out)?;
    let m = &set.manifest;
    let _ = writeln!(
        ctx.out,
        "wrote {} feature bundles to {} (embedding {} d={}, emotion {}, {} categories, context {})",
        set.bundles.len(),
        out.display(),
        m.embedding_provider,
        m.embedding_dim,
        m.emotion_provider,
        m.categories.len(),
        m.has_context
    );
    Ok(0)
}

fn default_log_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".log.tsv");
    PathBuf::from(s)
}

fn cmd_train(
    ctx: &mut Ctx,
    features: Option<PathBuf>,
    condition: Option<Condition>,
    checkpoint: Option<PathBuf>,
    log: Option<PathBuf>,
    max_epochs: Option<usize>,
) -> CmdResult {
    let features = required(&features, &ctx.cfg.paths.features, "features")?;
    let condition = required(&condition, &ctx.cfg.condition, "condition")?;
    let checkpoint = required(&checkpoint, &ctx.cfg.paths.checkpoint, "checkpoint")?;
    let set = FeatureSet::load(&features)?;
    let run = train_condition(&set, condition, &ctx.model_config(max_epochs))?;
    save_checkpoint(&checkpoint, &run.model, &run.schema)?;
    let log_path = log.unwrap_or_else(|| default_log_path(&checkpoint));
    write_text(&log_path, &run.log.to_tsv())?;
    let best = run.log.best();
    let _ = writeln!(
        ctx.out,
        "{condition}: {} epochs, best validation micro-F1 {:.4} at epoch {}",
        run.log.epochs.len(),
        best.map_or(0.0, |b| b.val_micro_f1),
        best.map_or(0, |b| b.epoch)
    );
    let _ = writeln!(
        ctx.out,
        "checkpoint {}  log {}",
        checkpoint.display(),
        log_path.display()
    );
    Ok(0)
}

fn cmd_predict(
    ctx: &mut Ctx,
    features: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    out: Option<PathBuf>,
) -> CmdResult {
    let features = required(&features, &ctx.cfg.paths.features, "features")?;
    let checkpoint = required(&checkpoint, &ctx.cfg.paths.checkpoint, "checkpoint")?;
    let out = required(&out, &ctx.cfg.paths.predictions, "out")?;
    let ck = load_checkpoint(&checkpoint)?;
    let set = FeatureSet::load(&features)?;
    let preds = predict_set(&ck.model, &ck.schema, &set)?;
    write_annotations(&out, &preds)?;
    let _ = writeln!(
        ctx.out,
        "wrote {} predictions to {}",
        preds.len(),
        out.display()
    );
    Ok(0)
}

fn cmd_evaluate(
    ctx: &mut Ctx,
    labels: Option<PathBuf>,
    predictions: Option<PathBuf>,
    baseline: Option<PathBuf>,
    out: Option<PathBuf>,
) -> CmdResult {
    let gold = load_annotations(&required(&labels, &ctx.cfg.paths.labels, "labels")?)?;
    let preds = load_annotations(&required(
        &predictions,
        &ctx.cfg.paths.predictions,
        "predictions",
    )?)?;
    let report = per_technique_f1(&preds, &gold)?;
    match baseline {
        Some(b) => {
            let base = per_technique_f1(&load_annotations(&b)?, &gold)?;
            let _ = write!(
                ctx.out,
                "{}",
                format_comparison("Baseline", &base, "Model", &report)
            );
        }
        None => {
            let _ = write!(ctx.out, "{}", report.to_text());
        }
    }
    if let Some(path) = out {
        write_text(&path, &report.to_tsv())?;
    }
    Ok(0)
}

fn cmd_ablate(
    ctx: &mut Ctx,
    features: Option<PathBuf>,
    eval_features: Option<PathBuf>,
    conditions: Vec<Condition>,
    max_epochs: Option<usize>,
    out: Option<PathBuf>,
) -> CmdResult {
    let train_set = FeatureSet::load(&required(&features, &ctx.cfg.paths.features, "features")?)?;
    let eval_set = match eval_features.or(ctx.cfg.paths.eval_features.clone()) {
        Some(p) => FeatureSet::load(&p)?,
        None => {
            log::warn!("no --eval-features given; scoring on the training cache");
            train_set.clone()
        }
    };
    let conditions = if !conditions.is_empty() {
        conditions
    } else if !ctx.cfg.conditions.is_empty() {
        ctx.cfg.conditions.clone()
    } else {
        Condition::ALL
            .into_iter()
            .filter(|c| train_set.schema(*c).is_ok())
            .collect()
    };
    let gold = gold_rows(&eval_set)?;
    let base = ctx.model_config(max_epochs);
    let mut rows: BTreeMap<usize, (Condition, f64, usize)> = BTreeMap::new();
    for (i, &c) in conditions.iter().enumerate() {
        let run = train_condition(&train_set, c, &base)?;
        let preds = predict_set(&run.model, &run.schema, &eval_set)?;
        let f1 = per_technique_f1(&preds, &gold)?.micro_f1;
        log::info!("{c}: micro-F1 {f1:.4}");
        rows.insert(i, (c, f1, run.log.epochs.len()));
    }
    let w = rows
        .values()
        .map(|r| r.0.name().len())
        .max()
        .unwrap_or(0)
        .max(8);
    let mut tsv = String::from("condition\tmicro_f1\tepochs\n");
    let _ = writeln!(
        ctx.out,
        "{:<w$}  {:>8}  {:>6}",
        "Features", "micro-F1", "epochs"
    );
    for (c, f1, epochs) in rows.values() {
        let _ = writeln!(ctx.out, "{:<w$}  {:>8.4}  {:>6}", c.name(), f1, epochs);
        tsv.push_str(&format!("{c}\t{f1:.6}\t{epochs}\n"));
    }
    if let Some(path) = out {
        write_text(&path, &tsv)?;
    }
    Ok(0)
}

fn cmd_fetch_scores(
    ctx: &mut Ctx,
    corpus: &CorpusArgs,
    url: Option<String>,
    out: Option<PathBuf>,
) -> CmdResult {
    let out = required(&out, &ctx.cfg.paths.emotion_scores, "out")?;
    let mut endpoint = ctx.cfg.endpoint.clone().unwrap_or_default();
    if let Some(u) = url {
        endpoint.url = u;
    }
    endpoint.validate()?;
    let spans = ctx.spans(corpus)?;
    let segments: Vec<_> = spans.into_iter().map(|s| s.segment).collect();
    let report = fetch_scores(&segments, &endpoint, &out)?;
    let _ = writeln!(
        ctx.out,
        "fetched {}, already present {}, failed {} ({} requests); store {}",
        report.fetched,
        report.skipped,
        report.failures.len(),
        report.requests,
        out.display()
    );
    if report.failures.is_empty() {
        Ok(0)
    } else {
        let _ = writeln!(
            ctx.out,
            "failed keys listed in {}",
            failure_sidecar(&out).display()
        );
        Ok(2)
    }
}
