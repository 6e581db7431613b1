use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mvdenoise",
    version,
    about = "Multivariate signal denoising with MVMD and Mahalanobis-norm DFA"
)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic benchmark signal, optionally with noise.
    Synth(SynthArgs),
    /// Split a multichannel signal into band-limited modes.
    Decompose(DecomposeArgs),
    /// Scaling exponent of a multichannel signal.
    Dfa(DfaArgs),
    /// Denoise a multichannel signal.
    Denoise(DenoiseArgs),
    /// Output SNR over a grid of input SNRs and noise seeds.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV, one column per channel.
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    /// Skip a header row in the input.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args, Default)]
pub struct MvmdArgs {
    /// Number of modes K.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Bandwidth penalty.
    #[arg(long, value_name = "ALPHA")]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Center frequency initialization: uniform, random or zero.
    #[arg(long)]
    pub init: Option<String>,
    /// Dual ascent step; 0 disables the multiplier update.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Seed for random initialization.
    #[arg(long)]
    pub mvmd_seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct ScoringArgs {
    /// Scales as "a:b" or a comma list.
    #[arg(long)]
    pub scales: Option<String>,
    /// Detrending polynomial order.
    #[arg(long)]
    pub order: Option<usize>,
    /// mahalanobis or euclidean.
    #[arg(long)]
    pub variant: Option<String>,
    /// PCA component rule: kaiser, all or fraction:<f>.
    #[arg(long)]
    pub pca_rule: Option<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// quad, blocks, bumps, doppler or heavisine.
    #[arg(long, default_value = "quad")]
    pub kind: String,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Average input SNR in dB; omitted means noise-free.
    #[arg(long, allow_negative_numbers = true)]
    pub snr: Option<f64>,
    /// Step per-channel SNR targets 1 dB apart around --snr.
    #[arg(long)]
    pub unbalanced: bool,
    /// Equal pairwise noise correlation.
    #[arg(long, allow_negative_numbers = true)]
    pub correlation: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Noisy (or clean, without --snr) output CSV.
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    /// Also write the clean signal here.
    #[arg(long, value_name = "CSV")]
    pub clean: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub mvmd: MvmdArgs,
    /// Directory for mode_NN.csv files and modes.json.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DfaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// mahalanobis, euclidean or univariate.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub scales: Option<String>,
    #[arg(long)]
    pub order: Option<usize>,
    /// Analyse only this zero-based column.
    #[arg(long)]
    pub channel: Option<usize>,
    /// Also write the JSON result here.
    #[arg(long, value_name = "JSON")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Clean reference for SNR reporting.
    #[arg(long, value_name = "CSV")]
    pub clean: Option<PathBuf>,
    #[command(flatten)]
    pub mvmd: MvmdArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Denoised output CSV.
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    #[arg(long, value_name = "JSON")]
    pub report: Option<PathBuf>,
    /// Write alpha_vs_k.svg and loglog_fluctuation.svg here.
    #[arg(long, value_name = "DIR")]
    pub plots: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Clean signal CSV; defaults to the synthetic --kind signal.
    #[arg(long, value_name = "CSV")]
    pub clean: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated average input SNRs in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_grid: Option<String>,
    /// Number of noise realizations per grid point.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub first_seed: Option<u64>,
    #[arg(long)]
    pub unbalanced: bool,
    #[command(flatten)]
    pub mvmd: MvmdArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[arg(long, value_name = "JSON")]
    pub report: Option<PathBuf>,
}
