//! `csmds` command-line driver.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "csmds", version, about = "Gradient-free MDS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Generate a dataset.
    #[command(subcommand)]
    Generate(GenerateCommand),
    /// Build a target dissimilarity matrix from points.
    Distances(DistancesArgs),
    /// Embed a target matrix.
    Embed(EmbedArgs),
    /// Score an embedding (or raw vectors) by held-out KNN accuracy.
    KnnEval(KnnEvalArgs),
    /// Run FS, RN and BS over a grid of probability settings.
    Grid(GridArgs),
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

/// A reproducible command as recorded in manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Invocation {
    GenerateSwissroll(SwissrollArgs),
    GenerateMnist(MnistArgs),
    Distances(DistancesArgs),
    Embed(EmbedArgs),
    KnnEval(KnnEvalArgs),
    Grid(GridArgs),
}

#[derive(Debug, Clone, Subcommand)]
enum GenerateCommand {
    /// Swiss-roll point cloud.
    Swissroll(SwissrollArgs),
    /// Labeled subset of an MNIST-format IDX pair.
    Mnist(MnistArgs),
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SwissrollArgs {
    #[arg(long, value_parser = positive_usize)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MnistArgs {
    /// IDX image file.
    #[arg(long)]
    pub images: PathBuf,
    /// IDX label file.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9])]
    pub classes: Vec<u32>,
    #[arg(long, value_parser = positive_usize)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pixel vectors CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Labels CSV.
    #[arg(long)]
    pub labels_out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Euclidean,
    Geodesic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Dijkstra,
    BellmanFord,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DistancesArgs {
    /// Point CSV (`index,x0,…` with optional trailing `aux`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Euclidean)]
    pub metric: Metric,
    /// Neighbors per point for the geodesic graph.
    #[arg(long, value_parser = positive_usize, required_if_eq("metric", "geodesic"))]
    pub knn: Option<usize>,
    #[arg(long, value_enum, default_value_t = Algorithm::Dijkstra)]
    pub algorithm: Algorithm,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Fs,
    Rn,
    Bs,
    Smacof,
    Classical,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    /// Target matrix CSV.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long, value_parser = positive_usize)]
    pub dims: usize,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub p_init: Option<f64>,
    #[arg(long)]
    pub p_a: Option<f64>,
    #[arg(long)]
    pub p_th: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// SMACOF relative-decrease tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// SMACOF iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KnnEvalArgs {
    /// Embedding or raw vector CSV.
    #[arg(long)]
    pub embedding: PathBuf,
    /// Labels CSV (`index,label`).
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = positive_usize, default_values_t = [1, 3, 5, 7, 9])]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 0.9)]
    pub train_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Method name in the report; defaults to the one in a sibling
    /// `summary.json`, else `initial`.
    #[arg(long)]
    pub method: Option<String>,
    /// Report CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridArgs {
    /// Target matrix CSV.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_parser = positive_usize)]
    pub dims: usize,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub p_init_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub p_th_grid: Vec<f64>,
    #[arg(long, default_value_t = csmds::search::DEFAULT_P_A)]
    pub p_a: f64,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let invocation = match Cli::parse().command {
        Command::Generate(GenerateCommand::Swissroll(a)) => Ok(Invocation::GenerateSwissroll(a)),
        Command::Generate(GenerateCommand::Mnist(a)) => Ok(Invocation::GenerateMnist(a)),
        Command::Distances(a) => Ok(Invocation::Distances(a)),
        Command::Embed(a) => Ok(Invocation::Embed(a)),
        Command::KnnEval(a) => Ok(Invocation::KnnEval(a)),
        Command::Grid(a) => Ok(Invocation::Grid(a)),
        Command::Replay { manifest } => manifest::Manifest::read(&manifest).map(|m| m.invocation),
    };
    match invocation.and_then(commands::run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use csmds::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Core(e) => match e {
                E::InvalidArgument(_) | E::InvalidConfig(_) => 2,
                E::Validation { .. }
                | E::Format { .. }
                | E::Disconnected { .. }
                | E::DivisionByZero(_)
                | E::Consistency(_) => 3,
                E::Numerical(_) => 4,
                E::Io(_) => 1,
            },
            CliError::Io(_) => 1,
        }
    }
}
