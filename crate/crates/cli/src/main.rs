//! `song` command-line front end.

mod commands;
mod input;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "song", version, about = "Incremental dimensionality reduction with self-organizing nebulous growths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a new model and save it.
    Fit(FitArgs),
    /// Continue training a saved model on new data.
    Grow(GrowArgs),
    /// Cluster the embedding with k-means and score it against labels (AMI).
    Eval(EvalArgs),
    /// Render a 2-D embedding as an SVG scatter plot.
    Plot(PlotArgs),
    /// Write a labelled Gaussian-blob dataset as CSV.
    Blobs(BlobsArgs),
}

/// Where to read a dataset from. CSV and IDX are told apart by file name.
#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// CSV file (`.csv`, `.txt`) or IDX image file (`*idx*`, `*ubyte*`, optionally `.gz`).
    #[arg(long)]
    pub data: PathBuf,
    /// The CSV file starts with a header row.
    #[arg(long)]
    pub header: bool,
    /// Zero-based CSV column holding integer labels.
    #[arg(long)]
    pub label_column: Option<usize>,
    /// IDX label file accompanying an IDX image file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

/// Report destinations shared by the training commands.
#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    /// Also write the report as JSON to this path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the embedding of the training data as CSV to this path.
    #[arg(long)]
    pub embedding_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output dimensionality.
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// Reduce the input to this many principal components first; the
    /// projection is stored in the model and reused by later commands.
    #[arg(long)]
    pub pca: Option<usize>,
    /// Random seed for initialization and sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hyperparameter override as `name=value` (repeatable), e.g. `k=4`, `t_max=50`.
    #[arg(long = "hyper", value_name = "NAME=VALUE")]
    pub hyper: Vec<String>,
    #[arg(long)]
    pub model_out: PathBuf,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Args, Debug)]
pub struct GrowArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub model_out: PathBuf,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Number of k-means clusters; defaults to the number of distinct labels.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Independent k-means runs, each scored separately.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Embedding CSV (as written by `--embedding-out`).
    #[arg(long, conflicts_with_all = ["model", "data"])]
    pub embedding: Option<PathBuf>,
    /// Zero-based label column of the embedding CSV.
    #[arg(long, requires = "embedding")]
    pub embedding_label_column: Option<usize>,
    /// Model to transform `--data` with.
    #[arg(long, requires = "data")]
    pub model: Option<PathBuf>,
    #[arg(long, requires = "model")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub label_column: Option<usize>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub svg_out: PathBuf,
    /// Draw every point in one color and omit the legend.
    #[arg(long)]
    pub no_color: bool,
    /// Circle radius in output pixels.
    #[arg(long, default_value_t = 2.0)]
    pub point_size: f64,
}

#[derive(Args, Debug)]
pub struct BlobsArgs {
    #[arg(long, default_value_t = 10)]
    pub clusters: usize,
    #[arg(long, default_value_t = 1.0)]
    pub std: f64,
    #[arg(long, default_value_t = 60)]
    pub dims: usize,
    #[arg(long, default_value_t = 200)]
    pub per_cluster: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub center_min: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub center_max: f64,
    /// Output CSV; the label is the last column.
    #[arg(long)]
    pub csv_out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Grow(a) => commands::grow(a),
        Command::Eval(a) => commands::eval(a),
        Command::Plot(a) => commands::plot(a),
        Command::Blobs(a) => commands::blobs(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
