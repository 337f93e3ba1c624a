//! The `decode` command line.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid input or
//! arguments, 3 scorer failure.
//!
//! Flags take precedence over environment variables (`DECODE_SCORER_URL`,
//! `DECODE_WORKERS`), which take precedence over defaults.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, CorpusError};
use crate::detect::{self, DetectError, Detection, DetectorConfig, Strategy};
use crate::dialogue::{Dialogue, LabeledExample, Validation};
use crate::eval::{self, Averaging, EvalError, StreamFlag};
use crate::rerank::{self, RerankError};
use crate::scorer::{HeuristicScorer, MockScorer, RemoteScorer, ScoreError, Scorer, DEFAULT_MAX_BATCH};
use crate::synth;
use crate::transform::{self, TransformError};

pub const ENV_SCORER_URL: &str = "DECODE_SCORER_URL";
pub const ENV_WORKERS: &str = "DECODE_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("scorer failure: {0}")]
    Scorer(ScoreError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Invalid(_) => 2,
            CliError::Scorer(_) => 3,
        }
    }

    fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(source) => CliError::Io {
                context: "reading corpus".into(),
                source,
            },
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::Score(s) => CliError::Scorer(s),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<RerankError> for CliError {
    fn from(e: RerankError) -> Self {
        match e {
            RerankError::Detect(d) => d.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "decode", version, about = "Dialogue contradiction detection toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a contradiction detector over a JSONL corpus.
    Detect(DetectArgs),
    /// Generate a synthetic corpus with planted contradictions.
    Synth(SynthArgs),
    /// Build A2T / RCT checklist sets or a length-balanced negative sample.
    Transform(TransformArgs),
    /// Score detector output against gold annotations.
    Evaluate(EvaluateArgs),
    /// Reorder generator hypotheses by contradiction score.
    Rerank(RerankArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Structured,
    Unstructured,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Structured => Strategy::Structured,
            StrategyArg::Unstructured => Strategy::Unstructured,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScorerArgs {
    /// heuristic | remote:URL | mock:FILE. Defaults to remote:$DECODE_SCORER_URL
    /// when that is set, otherwise heuristic.
    #[arg(long)]
    pub scorer: Option<String>,
    /// Pairs per wire call for remote scorers.
    #[arg(long, default_value_t = DEFAULT_MAX_BATCH)]
    pub max_batch: usize,
    #[arg(long, value_enum, default_value = "structured")]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = detect::DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long = "eta", default_value_t = detect::DEFAULT_ETA_E)]
    pub eta_e: f64,
}

impl ScorerArgs {
    fn config(&self) -> Result<DetectorConfig, CliError> {
        Ok(DetectorConfig::new(self.tau, self.eta_e, self.strategy.into())?)
    }

    fn build(&self) -> Result<Arc<dyn Scorer>, CliError> {
        let spec = match &self.scorer {
            Some(s) => s.clone(),
            None => match std::env::var(ENV_SCORER_URL) {
                Ok(url) if !url.is_empty() => format!("remote:{url}"),
                _ => "heuristic".into(),
            },
        };
        build_scorer(&spec, self.max_batch)
    }
}

/// Parses a `--scorer` value.
pub fn build_scorer(spec: &str, max_batch: usize) -> Result<Arc<dyn Scorer>, CliError> {
    if spec == "heuristic" {
        return Ok(Arc::new(HeuristicScorer));
    }
    if let Some(url) = spec.strip_prefix("remote:") {
        let remote = RemoteScorer::new(url).map_err(CliError::Scorer)?;
        return Ok(Arc::new(remote.with_max_batch(max_batch)));
    }
    if let Some(path) = spec.strip_prefix("mock:") {
        let mock = MockScorer::load(path).map_err(|e| CliError::Invalid(format!("mock table {path}: {e}")))?;
        return Ok(Arc::new(mock));
    }
    Err(CliError::Invalid(format!(
        "unknown scorer {spec:?}; expected heuristic, remote:URL or mock:FILE"
    )))
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    /// Score every turn of this speaker instead of only the final utterance.
    #[arg(long)]
    pub target_speaker: Option<String>,
    /// Accept non-alternating dialogues with a warning.
    #[arg(long)]
    pub lenient: bool,
    #[arg(long, env = ENV_WORKERS, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub contradiction_rate: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the planted-oracle mock table [default: <out>.oracle.json]
    #[arg(long)]
    pub oracle_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransformOp {
    A2t,
    Rct,
    Balance,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub op: TransformOp,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Turn-pair source for a2t (defaults to the input); negatives for balance.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvalMode {
    Balanced,
    Strict,
    Stream,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AveragingArg {
    Micro,
    Macro,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_enum)]
    pub mode: EvalMode,
    #[arg(long)]
    pub preds: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Averaging for supporting-evidence precision/recall/F1.
    #[arg(long, value_enum, default_value = "micro")]
    pub averaging: AveragingArg,
    #[arg(long, env = ENV_WORKERS, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct RerankArgs {
    /// JSON dialogue: {"id": .., "utterances": [..]}
    #[arg(long)]
    pub history: PathBuf,
    /// One hypothesis per line, best first.
    #[arg(long)]
    pub hyps: PathBuf,
    /// TSV output: original rank, score, text.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

/// One line of `detect` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub id: String,
    /// Utterance index, present for per-turn (stream) detection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub detection: Detection,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Detect(args) => cmd_detect(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Transform(args) => cmd_transform(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Rerank(args) => cmd_rerank(&args),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read_corpus(path: &Path, mode: Validation) -> Result<Vec<LabeledExample>, CliError> {
    let file = File::open(path).map_err(CliError::io(format!("opening {}", path.display())))?;
    corpus::parse_corpus(BufReader::new(file), mode).map_err(|e| match e {
        CorpusError::Io(source) => CliError::Io {
            context: format!("reading {}", path.display()),
            source,
        },
        other => CliError::Invalid(format!("{}: {other}", path.display())),
    })
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = File::open(path).map_err(CliError::io(format!("opening {}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(CliError::io(format!("reading {}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| CliError::Invalid(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(item);
    }
    Ok(out)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let context = format!("writing {}", path.display());
    let file = File::create(path).map_err(CliError::io(context.clone()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(CliError::io(context))
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start {workers} workers: {e}")))
}

pub fn cmd_detect(args: &DetectArgs) -> Result<(), CliError> {
    let cfg = args.scorer.config()?;
    let mode = if args.lenient { Validation::Lenient } else { Validation::Strict };
    let examples = read_corpus(&args.input, mode)?;
    let scorer = args.scorer.build()?;
    let pool = thread_pool(args.workers)?;

    let results: Vec<Result<Vec<DetectionRecord>, DetectError>> = pool.install(|| {
        examples
            .par_iter()
            .map(|ex| {
                let id = ex.dialogue.id().to_owned();
                match &args.target_speaker {
                    None => Ok(vec![DetectionRecord {
                        id,
                        index: None,
                        detection: detect::detect(&ex.dialogue, scorer.as_ref(), &cfg)?,
                    }]),
                    Some(target) => Ok(detect::detect_stream(&ex.dialogue, scorer.as_ref(), &cfg, target)?
                        .into_iter()
                        .map(|(k, detection)| DetectionRecord {
                            id: id.clone(),
                            index: Some(k),
                            detection,
                        })
                        .collect()),
                }
            })
            .collect()
    });
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    write_file(&args.out, |w| {
        for r in &records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let corpus = synth::generate(args.n, args.contradiction_rate, args.seed)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    write_file(&args.out, |w| corpus::serialize_corpus(&corpus.examples, w))?;
    let oracle_path = args.oracle_out.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".oracle.json");
        PathBuf::from(p)
    });
    corpus
        .oracle
        .save(&oracle_path)
        .map_err(|e| CliError::Invalid(format!("writing {}: {e}", oracle_path.display())))
}

pub fn cmd_transform(args: &TransformArgs) -> Result<(), CliError> {
    let input = read_corpus(&args.input, Validation::Strict)?;
    let output = match args.op {
        TransformOp::A2t => {
            let pool_examples = match &args.pool {
                Some(p) => read_corpus(p, Validation::Strict)?,
                None => input.clone(),
            };
            let pairs = transform::turn_pairs(pool_examples.iter().map(|e| &e.dialogue));
            apply_each(&input, |i, ex| transform::add_two_turns(ex, &pairs, transform::item_seed(args.seed, i)))?
        }
        TransformOp::Rct => apply_each(&input, |_, ex| transform::remove_contradicting_turns(ex))?,
        TransformOp::Balance => {
            let pool_path = args
                .pool
                .as_ref()
                .ok_or_else(|| CliError::Invalid("--pool is required for --op balance".into()))?;
            let negatives: Vec<Dialogue> = read_corpus(pool_path, Validation::Strict)?
                .into_iter()
                .filter(|e| !e.label.is_contradiction())
                .map(|e| e.dialogue)
                .collect();
            let positives: Vec<LabeledExample> = input.into_iter().filter(|e| e.label.is_contradiction()).collect();
            transform::balanced_sample(&positives, &negatives, args.seed)?
        }
    };
    write_file(&args.out, |w| corpus::serialize_corpus(&output, w))
}

/// Applies a per-example transform to every eligible example. Inputs the
/// transform cannot apply to are skipped with a warning.
fn apply_each(
    input: &[LabeledExample],
    f: impl Fn(usize, &LabeledExample) -> Result<LabeledExample, TransformError>,
) -> Result<Vec<LabeledExample>, CliError> {
    let mut out = Vec::with_capacity(input.len());
    let mut skipped = 0usize;
    for (i, ex) in input.iter().enumerate() {
        match f(i, ex) {
            Ok(t) => out.push(t),
            Err(TransformError::EmptyPool) => return Err(TransformError::EmptyPool.into()),
            Err(TransformError::NotContradiction { .. }) => skipped += 1,
            Err(e) => {
                log::warn!("skipping {}: {e}", ex.dialogue.id());
                skipped += 1;
            }
        }
    }
    if skipped > 0 {
        eprintln!("transformed {} example(s), skipped {skipped}", out.len());
    }
    Ok(out)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let averaging = match args.averaging {
        AveragingArg::Micro => Averaging::Micro,
        AveragingArg::Macro => Averaging::Macro,
    };
    let records: Vec<DetectionRecord> = read_jsonl(&args.preds)?;
    let report = match args.mode {
        EvalMode::Balanced | EvalMode::Strict => {
            let gold = read_corpus(&args.gold, Validation::Strict)?;
            check_ids(&records, &gold)?;
            let preds: Vec<Detection> = records.into_iter().map(|r| r.detection).collect();
            if matches!(args.mode, EvalMode::Strict) {
                eval::strict_report(&preds, &gold, averaging)?
            } else {
                eval::balanced_report(&preds, &gold)?
            }
        }
        EvalMode::Stream => {
            let flags: Vec<StreamFlag> = read_jsonl(&args.gold)?;
            let mut detections = Vec::with_capacity(records.len());
            for (position, r) in records.into_iter().enumerate() {
                let index = r.index.ok_or_else(|| {
                    CliError::Invalid(format!("prediction {position} ({}) has no utterance index", r.id))
                })?;
                detections.push((r.id, index, r.detection));
            }
            eval::stream_report(&detections, &flags)?
        }
    };
    write_file(&args.report, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        w.write_all(b"\n")
    })
}

fn check_ids(records: &[DetectionRecord], gold: &[LabeledExample]) -> Result<(), CliError> {
    if records.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            preds: records.len(),
            gold: gold.len(),
        }
        .into());
    }
    match records.iter().zip(gold).position(|(r, g)| r.id != g.dialogue.id()) {
        Some(i) => Err(CliError::Invalid(format!(
            "prediction {i} is for {} but gold is {}",
            records[i].id,
            gold[i].dialogue.id()
        ))),
        None => Ok(()),
    }
}

pub fn cmd_rerank(args: &RerankArgs) -> Result<(), CliError> {
    let cfg = args.scorer.config()?;
    let text = std::fs::read_to_string(&args.history)
        .map_err(CliError::io(format!("reading {}", args.history.display())))?;
    let history: Dialogue = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", args.history.display())))?;
    let hyps_text = std::fs::read_to_string(&args.hyps)
        .map_err(CliError::io(format!("reading {}", args.hyps.display())))?;
    let hypotheses: Vec<String> = hyps_text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .map(str::to_owned)
        .collect();
    let scorer = args.scorer.build()?;
    let ranked = rerank::rerank(&history, &hypotheses, scorer.as_ref(), &cfg)?;
    write_file(&args.out, |w| {
        for r in &ranked {
            writeln!(w, "{}\t{}\t{}", r.original_rank, r.score, r.text.replace('\t', " "))?;
        }
        Ok(())
    })
}
