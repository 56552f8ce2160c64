use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use witness_tda::classify::{default_k_grid, k_grid};
use witness_tda::{LandmarkStrategy, ToneKind};

#[derive(Debug, Parser)]
#[command(
    name = "witness-tda",
    version,
    about = "Witness-complex persistent homology for time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Persistence diagram of one window: diagram.csv and diagram.svg.
    Persist(PersistArgs),
    /// Compare Čech and witness complex sizes and build times at one scale.
    Bench(BenchArgs),
    /// Write a synthetic tone as 16-bit PCM WAV.
    Synth(SynthArgs),
    /// Write the delay reconstruction (and optionally landmark distances).
    Embed(EmbedArgs),
    /// Train a membership model from disjoint windows.
    Train(TrainArgs),
    /// Test windows of a recording against a trained model.
    Classify(ClassifyArgs),
    /// ROC sweep over the threshold multiplier k.
    Roc(RocArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// WAV file, or a one-column CSV of samples (needs --rate).
    #[arg(long)]
    pub input: PathBuf,
    /// Sample rate in Hz for CSV input.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Seconds to drop from the start of the input.
    #[arg(long, default_value_t = 0.0)]
    pub skip_seconds: f64,
}

/// Delay given directly in samples or derived from a fundamental frequency.
#[derive(Debug, Args, Clone, Copy)]
pub struct DelayArgs {
    /// Fundamental frequency in Hz; the delay is rate / (freq·π) samples.
    #[arg(long, conflicts_with = "tau")]
    pub freq: Option<f64>,
    /// Delay in samples.
    #[arg(long)]
    pub tau: Option<usize>,
    /// Reconstruction dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Number of landmarks.
    #[arg(long, default_value_t = 100)]
    pub landmarks: usize,
    #[arg(long, default_value = "even", value_parser = parse_strategy)]
    pub landmark_strategy: LandmarkStrategy,
    /// Rank-function grid resolution.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Scale cap; derived from the data when omitted.
    #[arg(long)]
    pub eps_max: Option<f64>,
    /// Use at most this many witnesses per window.
    #[arg(long)]
    pub witnesses: Option<usize>,
    /// Simplex dimension whose first appearance sets the derived scale cap.
    #[arg(long, default_value_t = 20)]
    pub stop_dim: usize,
}

#[derive(Debug, Args)]
pub struct PersistArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub delay: DelayArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Window length in seconds, taken from the start of the (trimmed) input.
    #[arg(long, default_value_t = 0.05)]
    pub window_sec: f64,
    /// Largest simplex dimension in the filtration.
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    /// Keep zero-persistence pairs in diagram.csv.
    #[arg(long)]
    pub keep_zero: bool,
    /// Also write filtration.csv.
    #[arg(long)]
    pub write_filtration: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Audio or sample CSV to reconstruct.
    #[arg(long, required_unless_present = "cloud", conflicts_with = "cloud")]
    pub input: Option<PathBuf>,
    /// Point cloud CSV, as written by `embed`.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub skip_seconds: f64,
    #[command(flatten)]
    pub delay: DelayArgs,
    /// Use the first this many reconstructed points.
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
    /// Landmark counts for the witness complexes.
    #[arg(long, value_delimiter = ',', default_value = "200,50")]
    pub landmarks: Vec<usize>,
    /// Fixed scale; otherwise eps-factor times the derived cap.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Landmark count for deriving the scale cap.
    #[arg(long, default_value_t = 100)]
    pub rule_landmarks: usize,
    #[arg(long, default_value_t = 0.6)]
    pub eps_factor: f64,
    #[arg(long, default_value_t = 20)]
    pub stop_dim: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = parse_tone)]
    pub kind: ToneKind,
    #[arg(long, default_value_t = 440.0)]
    pub freq: f64,
    /// Seconds.
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 44100.0)]
    pub rate: f64,
    /// Number of partials; each kind has its own default.
    #[arg(long)]
    pub partials: Option<usize>,
    /// Standard deviation of additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Seeds the noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seeds the partial phases.
    #[arg(long, default_value_t = 0)]
    pub phase_seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub delay: DelayArgs,
    /// Window length in seconds; the whole input when omitted.
    #[arg(long)]
    pub window_sec: Option<f64>,
    /// Also write landmark-to-witness distances for this many landmarks.
    #[arg(long)]
    pub landmarks: Option<usize>,
    #[arg(long, default_value = "even", value_parser = parse_strategy)]
    pub landmark_strategy: LandmarkStrategy,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Prf,
    Fft,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "prf")]
    pub model: ModelKind,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub delay: DelayArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Number of disjoint training windows.
    #[arg(long, default_value_t = 25)]
    pub windows: usize,
    #[arg(long, default_value_t = 0.05)]
    pub window_sec: f64,
    /// Hann taper before the FFT.
    #[arg(long)]
    pub taper: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 25)]
    pub windows: usize,
    /// Threshold multiplier.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Recording of the modelled class.
    #[arg(long)]
    pub positive: PathBuf,
    /// Recording of another class.
    #[arg(long)]
    pub negative: PathBuf,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub skip_seconds: f64,
    #[arg(long, default_value_t = 25)]
    pub windows: usize,
    /// A count of evenly spaced values in (0, 5], or a comma-separated list.
    #[arg(long, default_value = "100", value_parser = parse_k_grid)]
    pub k_grid: KGrid,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct KGrid(pub Vec<f64>);

impl Default for KGrid {
    fn default() -> Self {
        KGrid(default_k_grid())
    }
}

fn parse_k_grid(s: &str) -> Result<KGrid, String> {
    if let Ok(n) = s.parse::<usize>() {
        if n == 0 {
            return Err("k grid needs at least one value".into());
        }
        return Ok(KGrid(k_grid(5.0, n)));
    }
    let ks = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|k| k.is_finite() && *k >= 0.0)
                .ok_or_else(|| format!("bad k value {v:?}"))
        })
        .collect::<Result<Vec<f64>, String>>()?;
    if ks.windows(2).any(|w| w[1] < w[0]) {
        return Err("k values must be nondecreasing".into());
    }
    Ok(KGrid(ks))
}

fn parse_strategy(s: &str) -> Result<LandmarkStrategy, String> {
    s.parse().map_err(|e: witness_tda::Error| e.to_string())
}

fn parse_tone(s: &str) -> Result<ToneKind, String> {
    s.parse().map_err(|e: witness_tda::Error| e.to_string())
}
