//! `structvec` — batch CLI for structure-regularized domain word embeddings.
//!
//! Subcommands mirror the pipeline: `vocab`, `ppmi`, `train`,
//! `predict-structure`, `eval`, `neighbors`, `timeline`, `grid`. A JSON run
//! configuration (`--config`) supplies paths and parameters; flags override
//! file values. `STRUCTVEC_LOG` ∈ {error, warn, info, debug} controls
//! logging.

mod commands;
mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;
use structvec::Result;

#[derive(Parser)]
#[command(name = "structvec", version, about = "Structure-regularized domain word embeddings")]
struct Cli {
    /// JSON run configuration; flags override file values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Random seed override
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for per-slice work; 1 (the default) guarantees
    /// bit-reproducible outputs
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Omit the timestamp comment from reports
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the joint vocabulary from a sliced corpus
    Vocab(VocabArgs),
    /// Build per-slice PPMI matrices
    Ppmi(PpmiArgs),
    /// Train slice embeddings (constr, pred or den mode)
    Train(TrainArgs),
    /// Derive affinity, distances and a dendrogram from an embedding archive
    PredictStructure(PredictArgs),
    /// Run an evaluation protocol and write a report
    Eval(EvalArgs),
    /// Nearest neighbors of a word
    Neighbors(NeighborsArgs),
    /// Cosine timeline of a word against neighbor words across slices
    Timeline(TimelineArgs),
    /// Hyperparameter grid search with rescaled analogy scores
    Grid(GridArgs),
}

#[derive(Args)]
struct VocabArgs {
    /// Corpus location (JSONL file or slice directory root)
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Corpus layout: jsonl or slice-dirs
    #[arg(long)]
    format: Option<String>,
    /// Output vocabulary TSV
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    global_top_k: Option<usize>,
    #[arg(long)]
    slice_top_k: Option<usize>,
    #[arg(long)]
    min_slices: Option<usize>,
    #[arg(long)]
    stopword_top: Option<usize>,
}

#[derive(Args)]
struct PpmiArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Vocabulary TSV produced by `vocab`
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Output directory for the PPMI set
    #[arg(long)]
    out: Option<PathBuf>,
    /// Symmetric context window size
    #[arg(long)]
    window: Option<usize>,
    /// File encoding: tsv or bin
    #[arg(long)]
    ppmi_format: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory holding the PPMI set
    #[arg(long)]
    ppmi_dir: Option<PathBuf>,
    /// Output directory for the embedding archive
    #[arg(long)]
    out: Option<PathBuf>,
    /// Prior affinity TSV (constr/den modes)
    #[arg(long)]
    prior: Option<PathBuf>,
    /// Use the chain prior over the slice order
    #[arg(long)]
    chain_prior: bool,
    /// Training mode: constr, pred or den
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// Embedding dimensionality
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    /// Embedding archive directory
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output directory for affinity, distances and dendrogram
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EvalWhich {
    Analogy,
    CrossSlice,
    Similarity,
    Recall,
    Burrows,
}

#[derive(Args)]
struct EvalArgs {
    /// Which protocol to run
    #[arg(value_enum)]
    which: EvalWhich,
    /// Report output path (default: <reports_dir>/<which>.csv)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Test set path (analogy / cross-slice / similarity)
    #[arg(long)]
    tests: Option<PathBuf>,
    /// Correlation method for similarity: spearman or pearson
    #[arg(long)]
    method: Option<String>,
    /// k for recall@k
    #[arg(long)]
    k: Option<usize>,
    /// Ground-truth structure file for recall (affinity or distance TSV)
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Predicted structure file for recall (affinity or distance TSV)
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Corpus for the Burrows baseline
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Burrows feature rank range lower bound (inclusive)
    #[arg(long)]
    rank_lo: Option<usize>,
    /// Burrows feature rank range upper bound (exclusive)
    #[arg(long)]
    rank_hi: Option<usize>,
    /// Also write the Burrows Delta matrix as a distance TSV
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args)]
struct NeighborsArgs {
    /// Query word
    #[arg(long)]
    word: String,
    /// Slice label; omitted means the slice-averaged embedding
    #[arg(long)]
    slice: Option<String>,
    /// Number of neighbors
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Report output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TimelineArgs {
    /// Target word
    #[arg(long)]
    word: String,
    /// Comma-separated neighbor words
    #[arg(long, value_delimiter = ',')]
    neighbors: Option<Vec<String>>,
    /// Select neighbors from the two slices where the target drifts most
    #[arg(long)]
    auto: bool,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Report output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    ppmi_dir: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Analogy test set scoring each cell
    #[arg(long)]
    tests: Option<PathBuf>,
    /// Report output path (default: <reports_dir>/grid.csv)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated lambda values
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    /// Comma-separated tau values
    #[arg(long, value_delimiter = ',')]
    tau_grid: Option<Vec<f64>>,
    /// Training mode for the cells
    #[arg(long)]
    mode: Option<String>,
    /// Epochs per cell
    #[arg(long)]
    epochs: Option<usize>,
    /// Prior affinity TSV (constr/den cells and recall scoring)
    #[arg(long)]
    prior: Option<PathBuf>,
    #[arg(long)]
    chain_prior: bool,
    /// Score each cell against the prior structure at this k
    #[arg(long)]
    recall_k: Option<usize>,
}

/// Resolved global options shared by every command.
pub struct App {
    pub config: RunConfig,
    pub seed: Option<u64>,
    pub threads: usize,
    pub no_timestamp: bool,
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let app = App {
        config,
        seed: cli.seed,
        threads: cli.threads.max(1),
        no_timestamp: cli.no_timestamp,
    };

    match cli.command {
        Command::Vocab(args) => commands::cmd_vocab(&app, &args),
        Command::Ppmi(args) => commands::cmd_ppmi(&app, &args),
        Command::Train(args) => commands::cmd_train(&app, &args),
        Command::PredictStructure(args) => commands::cmd_predict_structure(&app, &args),
        Command::Eval(args) => commands::cmd_eval(&app, &args),
        Command::Neighbors(args) => commands::cmd_neighbors(&app, &args),
        Command::Timeline(args) => commands::cmd_timeline(&app, &args),
        Command::Grid(args) => commands::cmd_grid(&app, &args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("STRUCTVEC_LOG", "warn"),
    )
    .format_timestamp(None)
    .init();

    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
