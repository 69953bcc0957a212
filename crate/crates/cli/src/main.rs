//! Command-line front end for the iterative dense-cluster extraction
//! pipeline. Stages are separate subcommands with file handoffs so every
//! intermediate artifact can be inspected:
//!
//!   generate -> ingest -> select-features -> run
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clif_core::ClifError;

#[derive(Parser)]
#[command(
    name = "clif",
    about = "Iterative dense-cluster extraction for tabular data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a schema'd CSV, impute, one-hot encode, and min-max scale it.
    Ingest(IngestArgs),
    /// Rank features by ANOVA and ablation, then emit the combined selection.
    SelectFeatures(SelectArgs),
    /// Run the iterative extraction loop with principal feature reports.
    Run(RunArgs),
    /// Generate seeded synthetic blobs plus ground truth.
    Generate(GenerateArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Schema file: one `name,kind[,code;code...]` line per column.
    #[arg(long)]
    schema: PathBuf,
    /// Header column holding stable row identifiers (default: row index).
    #[arg(long)]
    id_column: Option<String>,
    /// Directory for encoded.csv and preprocess_report.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
pub struct SelectArgs {
    /// Encoded dataset from `ingest`.
    #[arg(long)]
    input: PathBuf,
    /// Preprocess report from `ingest` (default: preprocess_report.json
    /// next to the input).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Indicator column whose groups drive ANOVA and ablation.
    #[arg(long)]
    target: String,
    /// Number of features to select.
    #[arg(long, default_value_t = 12)]
    top_k: usize,
    /// Cross-validation folds for the ablation classifier.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Seed for the fold splits.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the ranking and selection files.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
pub struct RunArgs {
    /// Encoded dataset from `ingest`.
    #[arg(long)]
    input: PathBuf,
    /// Preprocess report from `ingest` (default: preprocess_report.json
    /// next to the input).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Selection file from `select-features` (default: every feature).
    #[arg(long)]
    selection: Option<PathBuf>,
    /// Density at or above which a cluster is extracted.
    #[arg(long, default_value_t = 0.85)]
    dense_threshold: f64,
    /// Density floor for flagging large sparse clusters.
    #[arg(long, default_value_t = 0.65)]
    sparse_low: f64,
    /// Minimum size for sparse flagging (default: twenty times the mean
    /// dense cluster size of the iteration).
    #[arg(long)]
    sparse_min_size: Option<usize>,
    /// Neighbors in the medoid density score.
    #[arg(long, default_value_t = 5)]
    k_neighbors: usize,
    /// Smallest cluster the clusterer may return.
    #[arg(long, default_value_t = 5)]
    min_cluster_size: usize,
    /// Neighbors behind core distances (default: min-cluster-size).
    #[arg(long)]
    min_samples: Option<usize>,
    /// Safety cap on the number of iterations.
    #[arg(long, default_value_t = 50)]
    max_iterations: usize,
    /// Wasserstein cut flagging indicator features as principal.
    #[arg(long, default_value_t = 1.0)]
    categorical_cut: f64,
    /// Range fraction flagging numerical features as principal.
    #[arg(long, default_value_t = 0.10)]
    numerical_fraction: f64,
    /// Seed recorded for reproducibility.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the run artifacts.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Number of Gaussian blobs.
    #[arg(long, default_value_t = 3)]
    blobs: usize,
    #[arg(long, default_value_t = 60)]
    points_per_blob: usize,
    /// Blob standard deviations, comma separated; one value broadcasts.
    #[arg(long, value_delimiter = ',', default_value = "0.02")]
    spread: Vec<f64>,
    /// Uniform background noise points.
    #[arg(long, default_value_t = 0)]
    noise: usize,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for data.csv, truth.csv, and schema.txt.
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version requests are not errors
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprintln!("error[usage]: {err}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::SelectFeatures(args) => commands::select_features(args),
        Command::Run(args) => commands::run(args),
        Command::Generate(args) => commands::generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = match &err {
                ClifError::Config(_) => (1, "config"),
                _ => (2, "data"),
            };
            eprintln!("error[{kind}]: {err}");
            ExitCode::from(code)
        }
    }
}
