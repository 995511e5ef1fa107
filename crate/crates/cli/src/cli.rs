use std::path::PathBuf;

use ccur::io::LoadOptions;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "CCUR_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "ccur",
    version,
    about = "Contrastive CUR feature/sample selection, classical CUR, CPCA and the recovery benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Contrastive column selection followed by row selection on the chosen columns.
    Ccur(Run<CcurArgs>),
    /// Classical CUR decomposition (deterministic or leverage-sampled).
    Cur(Run<CurArgs>),
    /// Rank features by the leading contrastive principal component.
    Cpca(Run<CpcaArgs>),
    /// Run the synthetic recovery benchmark and write tidy CSV curves.
    Simulate(Run<SimulateArgs>),
    /// Two-component PCA coordinates of the rows, flagged by selection.
    Project(Run<ProjectArgs>),
    /// Re-run a previous invocation from its manifest.json.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct Run<T: Args> {
    #[command(flatten)]
    pub args: T,

    /// Directory for all outputs (created if missing).
    #[arg(long, short = 'o')]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,

    /// Where to write the regenerated outputs.
    #[arg(long, short = 'o')]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Comma,
    Tab,
}

/// How delimited input files are parsed.
#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct InputFormat {
    /// Field delimiter.
    #[arg(long, value_enum, default_value_t = Delimiter::Comma)]
    pub delimiter: Delimiter,

    /// Input files have no header row of column labels.
    #[arg(long)]
    pub no_header: bool,

    /// The first field of each row is a row label.
    #[arg(long)]
    pub row_labels: bool,

    /// Transpose inputs after reading (e.g. features-by-samples files).
    #[arg(long)]
    pub transpose: bool,
}

impl InputFormat {
    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            delimiter: match self.delimiter {
                Delimiter::Comma => b',',
                Delimiter::Tab => b'\t',
            },
            has_header: !self.no_header,
            has_row_labels: self.row_labels,
            transpose: self.transpose,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct CcurArgs {
    /// Foreground (case) matrix, samples by features.
    #[arg(long)]
    pub fg: PathBuf,

    /// Background (control) matrix with the same features.
    #[arg(long)]
    pub bg: PathBuf,

    /// Singular vectors used for the leverage scores.
    #[arg(long, default_value_t = 7)]
    pub k: usize,

    /// Columns (features) to select.
    #[arg(long, default_value_t = 10)]
    pub c: usize,

    /// Rows (samples) to select; defaults to c.
    #[arg(long)]
    pub r: Option<usize>,

    /// Stabilizer added to the background leverage.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,

    /// Mean-center the columns of both groups first.
    #[arg(long)]
    pub center: bool,

    #[command(flatten)]
    pub format: InputFormat,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct CurArgs {
    /// Input matrix, samples by features.
    #[arg(long)]
    pub input: PathBuf,

    /// Rank used for the leverage scores.
    #[arg(long)]
    pub k: usize,

    /// Columns to keep.
    #[arg(long)]
    pub c: usize,

    /// Rows to keep.
    #[arg(long)]
    pub r: usize,

    /// Draw columns and rows with probability proportional to leverage.
    #[arg(long)]
    pub sampled: bool,

    /// Seed for --sampled.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub format: InputFormat,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct CpcaArgs {
    #[arg(long)]
    pub fg: PathBuf,

    #[arg(long)]
    pub bg: PathBuf,

    /// Weight of the background covariance.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Number of top features to report.
    #[arg(long, default_value_t = 10)]
    pub top: usize,

    #[command(flatten)]
    pub format: InputFormat,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct SimulateArgs {
    /// Foreground rows.
    #[arg(long, default_value_t = 500)]
    pub n: usize,

    /// Background rows.
    #[arg(long, default_value_t = 500)]
    pub m: usize,

    /// Features.
    #[arg(long, default_value_t = 100)]
    pub p: usize,

    /// Latent dimension of the generator.
    #[arg(long, default_value_t = 5)]
    pub latent_dim: usize,

    /// Entries of V, W, Z_shared, Z_unique with |x| below this are zeroed.
    #[arg(long, default_value_t = 1.8)]
    pub threshold: f64,

    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 100)]
    pub replicates: usize,

    /// Singular vectors used by every method.
    #[arg(long, default_value_t = 10)]
    pub method_k: usize,

    /// Columns CCUR keeps before ranking rows.
    #[arg(long, default_value_t = 10)]
    pub ccur_c: usize,

    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,

    /// CPCA contrast strength.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Methods to compare: ccur, cur-fg, cur-union, cpca.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "ccur,cur-fg,cur-union,cpca"
    )]
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct ProjectArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Rows to flag: a selection JSON with "row_indices", or a list of
    /// 0-based indices separated by commas or whitespace.
    #[arg(long)]
    pub selected_rows_file: Option<PathBuf>,

    #[command(flatten)]
    pub format: InputFormat,
}
