use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Plug-and-play image restoration: deblurring, super-resolution and
/// demosaicing with a pluggable denoiser.
#[derive(Parser, Debug)]
#[command(name = "pnpir", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize an observation from a ground-truth image.
    Degrade(DegradeArgs),
    /// Non-blind deblurring.
    Deblur(DeblurArgs),
    /// Single-image super-resolution.
    Sr(SrArgs),
    /// Bayer demosaicing.
    Demosaic(DemosaicArgs),
    /// PSNR between two images.
    Psnr(PsnrArgs),
    /// Histogram of the difference between two images, as CSV.
    Histogram(HistogramArgs),
    /// Final PSNR over a grid of iteration counts and starting noise levels.
    Sweep(SweepArgs),
    /// Serve a built-in denoiser over PPDN/1 on stdin/stdout.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskKind {
    Deblur,
    /// Blur then s-fold decimation.
    Sr,
    /// Bicubic downscaling.
    SrBicubic,
    Demosaic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Closed,
    Ibp,
}

/// Degradation description shared by `degrade` and `sweep`.
#[derive(Args, Debug, Clone)]
pub struct TaskArgs {
    #[arg(long, value_enum)]
    pub task: TaskKind,
    /// Blur kernel text file (`kh kw` header, then rows of taps).
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    #[arg(long)]
    pub scale: Option<usize>,
    /// 2x2 CFA tile, e.g. RGGB.
    #[arg(long, default_value = "RGGB")]
    pub pattern: String,
}

#[derive(Args, Debug)]
pub struct DegradeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub task: TaskArgs,
    /// AWGN level on the 0–255 scale.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON sidecar path; defaults to the output path with `.json` appended.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

/// Flags shared by the three restoration commands.
#[derive(Args, Debug, Clone)]
pub struct RestoreArgs {
    /// Observation(s). With more than one input, `--output` (and `--report`,
    /// `--trace`, `--dump` when given) name directories.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    /// Observation noise level on the 0–255 scale.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Number of outer iterations K (task default when omitted).
    #[arg(long)]
    pub iters: Option<usize>,
    /// First denoiser noise level (default 49).
    #[arg(long)]
    pub sigma1: Option<f64>,
    /// Last denoiser noise level (task default when omitted).
    #[arg(long = "sigmaK", alias = "sigma-k")]
    pub sigma_k: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// identity | tv | tv:<kappa> | dct | median | extern:<command line>.
    /// A bare `tv` uses the task's default weight.
    #[arg(long, default_value = "tv")]
    pub denoiser: String,
    /// Seconds to wait for each external denoiser response.
    #[arg(long, default_value_t = 60)]
    pub denoiser_timeout: u64,
    #[arg(long)]
    pub no_ensemble: bool,
    /// Stop early when the relative change of z drops below this value.
    #[arg(long)]
    pub stop_tol: Option<f64>,
    /// Per-iteration trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Run report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Directory for x_k / z_k PNG dumps.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Iterations to dump, comma separated (all when omitted).
    #[arg(long, value_delimiter = ',')]
    pub dump_iters: Vec<usize>,
    /// Ground truth, enables PSNR in the trace and report.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Seed recorded in the report (e.g. the one used by `degrade`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restore several inputs concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct DeblurArgs {
    #[command(flatten)]
    pub common: RestoreArgs,
    #[arg(long)]
    pub kernel: PathBuf,
}

#[derive(Args, Debug)]
pub struct SrArgs {
    #[command(flatten)]
    pub common: RestoreArgs,
    #[arg(long)]
    pub scale: usize,
    /// Blur kernel of the classical model; bicubic degradation when omitted.
    #[arg(long, conflicts_with = "bicubic")]
    pub kernel: Option<PathBuf>,
    /// Assume bicubic degradation (the default without `--kernel`).
    #[arg(long)]
    pub bicubic: bool,
    #[arg(long, value_enum, default_value_t = SolverKind::Closed)]
    pub solver: SolverKind,
    #[arg(long, default_value_t = pnp_restore::prox::DEFAULT_IBP_GAMMA)]
    pub ibp_gamma: f64,
    #[arg(long, default_value_t = pnp_restore::prox::DEFAULT_IBP_ITERS)]
    pub ibp_iters: usize,
}

#[derive(Args, Debug)]
pub struct DemosaicArgs {
    #[command(flatten)]
    pub common: RestoreArgs,
    /// 2x2 CFA tile of the mosaic, e.g. RGGB.
    #[arg(long, default_value = "RGGB")]
    pub pattern: String,
}

#[derive(Args, Debug)]
pub struct PsnrArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Pixels to ignore along each edge.
    #[arg(long, default_value_t = 0)]
    pub border: usize,
}

#[derive(Args, Debug)]
pub struct HistogramArgs {
    pub x: PathBuf,
    pub gt: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[command(flatten)]
    pub task: TaskArgs,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma1s: Vec<f64>,
    #[arg(long = "sigmaK", alias = "sigma-k")]
    pub sigma_k: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value = "tv")]
    pub denoiser: String,
    #[arg(long)]
    pub no_ensemble: bool,
    /// Evaluate grid cells concurrently.
    #[arg(long)]
    pub parallel: bool,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// identity | tv | tv:<kappa> | dct | median.
    #[arg(long, default_value = "tv")]
    pub denoiser: String,
}
