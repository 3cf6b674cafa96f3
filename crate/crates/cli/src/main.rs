mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::io::Failure;

/// Isotonic regression with finite-sample confidence bands.
#[derive(Debug, Parser)]
#[command(name = "isoband", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Least-squares nondecreasing fit of a sequence.
    Fit(FitArgs),
    /// Confidence band around the isotonic fit of noisy observations.
    Band(BandArgs),
    /// Theoretical envelope for iso(y) - x given the signal x.
    Envelope(EnvelopeArgs),
    /// Check a built-in norm for the neighbor-averaging property and contraction.
    CheckNorm(CheckNormArgs),
    /// Grenander estimate of a nonincreasing density on [0, 1].
    Density(DensityArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Estimate the noise level from the isotonic residuals.
    Sigma(SigmaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Input file with one value per line ("-" for stdin).
    input: PathBuf,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Also write the blocks as `start,end,level` CSV to this file.
    #[arg(long)]
    blocks: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PsiChoice {
    Sqrt,
    Const,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SigmaMethodArg {
    Mle,
    BiasCorrected,
}

#[derive(Debug, Args)]
struct BandArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Noise level; estimated from the residuals when omitted.
    #[arg(long)]
    sigma: Option<f64>,
    /// Estimator used when --sigma is omitted.
    #[arg(long, value_enum, default_value_t = SigmaMethodArg::BiasCorrected)]
    sigma_method: SigmaMethodArg,
    #[arg(long, default_value_t = isoband::bands::DEFAULT_C1)]
    c1: f64,
    /// Miscoverage level in (0, 1).
    #[arg(long)]
    delta: Option<f64>,
    /// Widen both envelopes by this amount to cover an eps-monotone signal.
    #[arg(long, default_value_t = 0.0)]
    eps_iso: f64,
    /// Build the deterministic band for a known sliding-window distance
    /// instead of the noise-calibrated one.
    #[arg(long)]
    sw_bound: Option<f64>,
    /// Window weight for --sw-bound.
    #[arg(long, value_enum, default_value_t = PsiChoice::Sqrt)]
    psi: PsiChoice,
    /// File of psi(1), psi(2), ... for --psi custom.
    #[arg(long)]
    psi_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormArg {
    Projected,
    Direct,
}

#[derive(Debug, Args)]
struct EnvelopeArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    delta: f64,
    /// `projected` centers on iso(x); `direct` centers on x and adds eps_iso(x).
    #[arg(long, value_enum, default_value_t = FormArg::Projected)]
    form: FormArg,
}

#[derive(Debug, Args)]
struct CheckNormArgs {
    /// One of l1, l2, linf, sw-sqrt, first-coord.
    #[arg(long)]
    norm: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random probe vectors per length.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Random pairs per length for the contraction check.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Lower bound of the density, for the uniform band.
    #[arg(long, requires_all = ["lipschitz", "delta"])]
    c: Option<f64>,
    /// Lipschitz constant of the density, for the uniform band.
    #[arg(long, requires = "c")]
    lipschitz: Option<f64>,
    #[arg(long, requires = "c")]
    delta: Option<f64>,
}

#[derive(Debug, Args)]
struct SimCommon {
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Summary output (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum SimulateCommand {
    /// Band width against n in flat and increasing regions.
    Slopes(SlopesArgs),
    /// Coverage of the band with shrunk half-widths.
    Coverage(CoverageArgs),
    /// Sup error of the Grenander estimator for g(t) = (1 + s/2) - s t.
    Density(DensitySimArgs),
}

#[derive(Debug, Args)]
struct SlopesArgs {
    #[command(flatten)]
    common: SimCommon,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = (700..=1000).step_by(30).collect::<Vec<usize>>())]
    n_values: Vec<usize>,
    /// Use every n from 700 to 1000.
    #[arg(long, conflicts_with = "n_values")]
    full_grid: bool,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Write one JSON record per trial (JSON lines) to this file.
    #[arg(long)]
    trials_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    #[command(flatten)]
    common: SimCommon,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Half-width scale factors, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 0.95, 0.9, 0.855, 0.8])]
    factors: Vec<f64>,
}

#[derive(Debug, Args)]
struct DensitySimArgs {
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Slope s of the density, in [0, 2).
    #[arg(long, default_value_t = 1.0)]
    slope: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct SigmaArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, value_enum, default_value_t = SigmaMethodArg::BiasCorrected)]
    method: SigmaMethodArg,
    #[arg(long, default_value_t = isoband::bands::DEFAULT_C1)]
    c1: f64,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ISOBAND_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&k| k > 0).ok_or_else(|| {
        Failure::input(format!(
            "ISOBAND_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::input(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Band(a) => commands::band(a),
        Command::Envelope(a) => commands::envelope(a),
        Command::CheckNorm(a) => commands::check_norm(a),
        Command::Density(a) => commands::density(a),
        Command::Simulate(SimulateCommand::Slopes(a)) => commands::simulate_slopes(a),
        Command::Simulate(SimulateCommand::Coverage(a)) => commands::simulate_coverage(a),
        Command::Simulate(SimulateCommand::Density(a)) => commands::simulate_density(a),
        Command::Sigma(a) => commands::sigma(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("isoband: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
