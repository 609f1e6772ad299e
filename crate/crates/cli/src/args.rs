use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hrp_core::experiment::{DictionaryMode, Method, Variant};
use hrp_core::learner::HrpConfig;

#[derive(Debug, Parser)]
#[command(
    name = "hrp",
    version,
    about = "Orthogonal dictionary learning and sparse coding by hierarchical Riemannian pursuit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a dictionary from a data table and write dictionary, codes and report.
    Learn(LearnArgs),
    /// Generate Y = D*·X* with a random orthogonal D* and Bernoulli-Gaussian X*.
    Synth(SynthArgs),
    /// Success rates over N, θ and L = 10·N^e.
    Phase(PhaseArgs),
    /// RMSE and wall time per method over a (θ, L) grid.
    Bench(BenchArgs),
    /// Learn once, then code and reconstruct a sensor table at several budgets.
    Compress(CompressArgs),
}

/// Solver flags shared by every command that learns.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Initial Stage-Two step.
    #[arg(long, default_value_t = 0.1)]
    pub tau0: f64,
    /// Stage-Two step decay; defaults to 0.8 (0.95 for the sphere variant).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Stage-One stopping tolerance on the scaled iterate change.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Stage-One iteration cap.
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Stage-Two iteration cap; defaults to 200 (600 for the sphere variant).
    #[arg(long)]
    pub stage2_max_iters: Option<usize>,
    /// Random restarts for the sphere variant (default ⌈5 ln N⌉).
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn config(&self, sphere: bool) -> HrpConfig {
        let base = if sphere {
            HrpConfig::sphere(self.seed)
        } else {
            HrpConfig::with_seed(self.seed)
        };
        HrpConfig {
            tau0: self.tau0,
            eta: self.eta.unwrap_or(base.eta),
            stage1_tol: self.tol,
            stage1_max_iters: self.max_iters,
            stage2_max_iters: self.stage2_max_iters.unwrap_or(base.stage2_max_iters),
            restarts: self.restarts,
            ..base
        }
    }
}

/// How to read a delimited input table.
#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Delimited text, one row per sensor and one column per sample.
    #[arg(long)]
    pub input: PathBuf,
    /// File rows are samples and columns are sensors.
    #[arg(long)]
    pub transpose: bool,
    /// First row holds column labels.
    #[arg(long)]
    pub header: bool,
    /// First column holds row labels.
    #[arg(long)]
    pub row_labels: bool,
    /// Cell text marking a missing reading; repeatable. Defaults to "", "NaN", "nan".
    #[arg(long = "missing-token")]
    pub missing_tokens: Vec<String>,
    /// Numeric value marking a missing reading, e.g. -10.
    #[arg(long, allow_hyphen_values = true)]
    pub missing_value: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Directory for dictionary.json, codes.csv and report.json.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "hrp")]
    pub method: Method,
    /// Keep only the T₀ largest-magnitude entries of each code column.
    #[arg(long)]
    pub t0: Option<usize>,
    /// Reference dictionary JSON; adds the sign-permutation RMSE to the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// RMSE below which the run counts as a success in the report.
    #[arg(long, default_value_t = hrp_core::metrics::DEFAULT_SUCCESS_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for data.csv, dictionary.json, codes.csv and manifest.json.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub theta: Vec<f64>,
    /// Sample-size exponents e in L = round(10·N^e).
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2,2.5")]
    pub exponents: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = hrp_core::metrics::DEFAULT_SUCCESS_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value = "group")]
    pub variant: Variant,
    /// Share one dictionary across trials (`fixed`) or draw one per trial.
    #[arg(long, default_value = "fixed")]
    pub dict_mode: DictionaryMode,
    /// Run trials one at a time.
    #[arg(long)]
    pub sequential: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(
        long = "method",
        value_delimiter = ',',
        default_value = "hrp,stage1-only,l4-msp"
    )]
    pub methods: Vec<Method>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub l: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value = "resampled")]
    pub dict_mode: DictionaryMode,
    /// Run trials concurrently; wall times then include contention.
    #[arg(long)]
    pub parallel: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Sparsity budgets to evaluate.
    #[arg(long, value_delimiter = ',', required = true)]
    pub t0: Vec<usize>,
    #[arg(long, default_value = "hrp")]
    pub method: Method,
    /// Directory for compression.csv, dictionary.json and report.json.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}
