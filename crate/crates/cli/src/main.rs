//! `inclusion`: simulate DtN data, scan the sampling indicator, extract a
//! boundary and recover its impedance.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod expr;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "inclusion", version, about = "Inclusion reconstruction from electrostatic boundary data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate DtN data for an inclusion inside the unit disk.
    Forward(ForwardArgs),
    /// Evaluate the sampling indicator on a grid.
    Sample(SampleArgs),
    /// Extract the indicator level set and fit a trigonometric curve.
    Extract(ExtractArgs),
    /// Recover the boundary impedance from Cauchy data.
    Impedance(ImpedanceArgs),
    /// Run the numerical self-checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BcKind {
    Dirichlet,
    Impedance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormKind {
    L2,
    H12,
}

#[derive(Args)]
pub struct ForwardArgs {
    /// Inclusion geometry (JSON).
    #[arg(long)]
    pub geometry: PathBuf,
    #[arg(long, value_enum, default_value = "dirichlet")]
    pub bc: BcKind,
    /// Impedance: expression in `theta`, expression file or impedance CSV.
    #[arg(long)]
    pub gamma: Option<String>,
    /// `fourier:N`, `onesided:K` or `collocation:n`.
    #[arg(long, default_value = "fourier:19")]
    pub basis: String,
    /// Quadrature nodes per curve.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    /// Relative flux noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SampleArgs {
    /// DtN file written by `forward`.
    #[arg(long)]
    pub data: PathBuf,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[arg(long, default_value_t = inclusion_core::sampling::DEFAULT_MASK_RADIUS)]
    pub mask_radius: f64,
    /// Relative noise applied to the gap matrix.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `tikhonov`, `tikhonov:ALPHA`, `tikhonov:disc:C` or `cutoff:TAU`.
    #[arg(long, default_value = "tikhonov:disc:1")]
    pub reg: String,
    /// Noise level assumed by the discrepancy principle (defaults to `--noise`,
    /// or 0.05 for noiseless data).
    #[arg(long)]
    pub disc_level: Option<f64>,
    #[arg(long, value_enum, default_value = "l2")]
    pub norm: NormKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ExtractArgs {
    /// Indicator CSV written by `sample`.
    #[arg(long)]
    pub indicator: PathBuf,
    /// Level as a fraction of the maximum of W.
    #[arg(long, default_value_t = inclusion_core::sampling::DEFAULT_THRESHOLD)]
    pub threshold_rel: f64,
    /// Trigonometric degree M of the fitted curve.
    #[arg(long, default_value_t = 7)]
    pub degree: usize,
    /// Smoothing weight (defaults to the square of the recorded discrepancy level).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ImpedanceArgs {
    /// Inclusion boundary used for the reconstruction (exact or fitted).
    #[arg(long)]
    pub geometry: PathBuf,
    /// Collocation DtN file providing the currents.
    #[arg(long, conflicts_with_all = ["true_geometry", "gamma"])]
    pub data: Option<PathBuf>,
    /// Inclusion used to simulate the currents.
    #[arg(long, requires = "gamma")]
    pub true_geometry: Option<PathBuf>,
    /// Impedance of the simulated inclusion.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Number of voltage patterns (cos θ, sin θ, cos 2θ, ...).
    #[arg(long, default_value_t = 8)]
    pub pairs: usize,
    /// Relative current noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "tikhonov:disc:1.5")]
    pub reg: String,
    /// Multiplier on the discrepancy level (defaults to 2 for fitted curves, else 1).
    #[arg(long)]
    pub model_error: Option<f64>,
    #[arg(long, default_value_t = inclusion_core::impedance::DEFAULT_MASK_TOL)]
    pub mask_tol: f64,
    /// Quadrature nodes per curve.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-pair values as JSON.
    #[arg(long)]
    pub pairs_json: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, hide = true)]
    pub flip_kernel_sign: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Forward(a) => commands::forward(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Extract(a) => commands::extract(&a),
        Command::Impedance(a) => commands::impedance(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
