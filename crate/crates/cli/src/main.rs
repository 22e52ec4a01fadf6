//! `connoframe`: command-line pipeline for connotation frames.
//!
//! Typical order: aggregate, split, train-aspect, train-frame,
//! predict-frame, eval, analyze.

mod commands;

use std::fmt::Debug;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "connoframe", version, about = "Learn and apply connotation frames for verbs")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for per-aspect, per-verb and per-file work.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Suppress warnings on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Aggregate crowd annotations into a gold lexicon.
    Aggregate(AggregateArgs),
    /// Print per-aspect agreement statistics.
    Agreement(AgreementArgs),
    /// Split a lexicon into train, dev and test parts.
    Split(SplitArgs),
    /// Train the nine aspect-level classifiers.
    TrainAspect(TrainAspectArgs),
    /// Label verbs with the aspect-level classifiers.
    PredictAspect(PredictAspectArgs),
    /// Train frame-level factor weights.
    TrainFrame(TrainFrameArgs),
    /// Label verbs with the frame-level model.
    PredictFrame(PredictFrameArgs),
    /// Run a reference system.
    Baseline(BaselineArgs),
    /// Score a predicted lexicon against gold labels.
    Eval(EvalArgs),
    /// Mean connotation of verbs linking agent and theme phrases in a tuple corpus.
    Analyze(AnalyzeArgs),
    /// Most frequent fillers of a verb role per source leaning.
    Contrast(ContrastArgs),
    /// Write frame weights as text or CSV tables.
    ExportWeights(ExportWeightsArgs),
    /// Check inference and gradients against brute-force oracles.
    Selfcheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Aggregate(_) => "aggregate",
            Command::Agreement(_) => "agreement",
            Command::Split(_) => "split",
            Command::TrainAspect(_) => "train-aspect",
            Command::PredictAspect(_) => "predict-aspect",
            Command::TrainFrame(_) => "train-frame",
            Command::PredictFrame(_) => "predict-frame",
            Command::Baseline(_) => "baseline",
            Command::Eval(_) => "eval",
            Command::Analyze(_) => "analyze",
            Command::Contrast(_) => "contrast",
            Command::ExportWeights(_) => "export-weights",
            Command::Selfcheck => "selfcheck",
        }
    }
}

#[derive(Args, Debug)]
pub struct AggregateArgs {
    /// Annotation CSV: verb,sentence_id,worker_id,aspect,response.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Collapse {
    Polar,
    Neutral,
}

#[derive(Args, Debug)]
pub struct AgreementArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Where "or neutral" answers go for alpha.
    #[arg(long, value_enum, default_value = "polar")]
    pub collapse: Collapse,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    /// Lexicon TSV to split.
    #[arg(long)]
    pub verbs: PathBuf,
    /// Directory for train.tsv, dev.tsv and test.tsv.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Explicit part sizes as TRAIN,DEV,TEST.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub sizes: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ClassWeights {
    Uniform,
    Inverse,
    Grid,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Optimizer {
    Lbfgs,
    Gd,
}

#[derive(Args, Debug)]
pub struct TrainAspectArgs {
    /// Gold lexicon TSV.
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Output directory for the nine model files.
    #[arg(long)]
    pub out: PathBuf,
    /// Development lexicon, needed for grid class weights.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub l2: f64,
    #[arg(long, value_enum, default_value = "inverse")]
    pub class_weights: ClassWeights,
    #[arg(long, value_enum, default_value = "lbfgs")]
    pub optimizer: Optimizer,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct PredictAspectArgs {
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Verb list (or lexicon; only the first column is used).
    #[arg(long)]
    pub verbs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainFrameArgs {
    /// Gold lexicon TSV.
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub aspect_models: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Development lexicon; picks the learning rate from {0.01, 0.1, 1.0}.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub l2: f64,
    /// Step size in epoch e is lr / (1 + decay * e).
    #[arg(long, default_value_t = 0.1)]
    pub decay: f64,
    #[arg(long)]
    pub no_shuffle: bool,
    #[arg(long)]
    pub full_batch: bool,
    /// Feed aspect-level probabilities instead of hard labels to unary factors.
    #[arg(long)]
    pub soft_evidence: bool,
}

#[derive(Args, Debug)]
pub struct PredictFrameArgs {
    #[arg(long)]
    pub verbs: PathBuf,
    #[arg(long)]
    pub aspect_models: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub soft_evidence: bool,
    /// Write each verb's factor graph as text to this file.
    #[arg(long)]
    pub dump_graph: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Method {
    Majority,
    Knn,
    Graphprop,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    /// Gold lexicon TSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Verbs to label.
    #[arg(long)]
    pub test: PathBuf,
    /// Needed by knn and graphprop.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sim_floor: f64,
    #[arg(long, default_value_t = 1.0)]
    pub potential_scale: f64,
    #[arg(long, default_value_t = 5.0)]
    pub seed_strength: f64,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    /// Restrict to these aspects, e.g. P_wt,E_a.
    #[arg(long, value_delimiter = ',')]
    pub aspects: Option<Vec<String>>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value = "evaluation")]
    pub title: String,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Glob of tuple files: source, subject, verb, object, count.
    #[arg(long)]
    pub tuples: String,
    #[arg(long)]
    pub lexicon: PathBuf,
    /// CSV of agent,theme patterns; either may be empty.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Aspect whose score or label rates each verb.
    #[arg(long, default_value = "P_at")]
    pub aspect: String,
    /// Count each tuple once instead of by its count.
    #[arg(long)]
    pub unweighted: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LeaningArg {
    Left,
    Right,
    Both,
}

#[derive(Args, Debug)]
pub struct ContrastArgs {
    #[arg(long)]
    pub verb: String,
    /// agent or theme.
    #[arg(long)]
    pub role: String,
    /// TSV of source and leaning (left or right).
    #[arg(long)]
    pub leanings: PathBuf,
    #[arg(long)]
    pub tuples: String,
    #[arg(long, value_enum, default_value = "both")]
    pub leaning: LeaningArg,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Word polarity TSV; adds the polarity make-up of the role's head words.
    #[arg(long)]
    pub words: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportWeightsArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Emit 3x3 CSV tables instead of the text format.
    #[arg(long)]
    pub csv: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(connotation::Error),
}

impl From<connotation::Error> for CliError {
    fn from(e: connotation::Error) -> Self {
        CliError::Data(e)
    }
}

/// Comment text placed at the top of every output file.
pub fn header(cli: &Cli) -> String {
    let flags = match &cli.command {
        Command::Aggregate(a) => format!("{a:?}"),
        Command::Agreement(a) => format!("{a:?}"),
        Command::Split(a) => format!("{a:?}"),
        Command::TrainAspect(a) => format!("{a:?}"),
        Command::PredictAspect(a) => format!("{a:?}"),
        Command::TrainFrame(a) => format!("{a:?}"),
        Command::PredictFrame(a) => format!("{a:?}"),
        Command::Baseline(a) => format!("{a:?}"),
        Command::Eval(a) => format!("{a:?}"),
        Command::Analyze(a) => format!("{a:?}"),
        Command::Contrast(a) => format!("{a:?}"),
        Command::ExportWeights(a) => format!("{a:?}"),
        Command::Selfcheck => String::new(),
    };
    format!(
        "connoframe {VERSION} {} seed={} {}",
        cli.command.name(),
        cli.seed,
        flags
    )
    .trim_end()
    .to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(1);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
