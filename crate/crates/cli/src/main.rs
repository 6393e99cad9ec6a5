//! `s3radon` command-line tool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

#[derive(Parser, Debug)]
#[command(name = "s3radon", version, about = "Spherical Radon transforms on S3 and ODF reconstruction")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by all subcommands.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output path; standard output when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Great-circle and small-circle quadrature nodes.
    #[arg(long, global = true, default_value_t = s3radon::quadrature::DEFAULT_CIRCLE_NODES)]
    pub circle_nodes: usize,
    /// Polynomial degree of the sphere rule.
    #[arg(long, global = true, default_value_t = s3radon::quadrature::DEFAULT_SPHERE_DEGREE)]
    pub sphere_degree: usize,
    /// Torus quadrature nodes per circle.
    #[arg(long, global = true, default_value_t = s3radon::quadrature::DEFAULT_TORUS_NODES)]
    pub torus_nodes: usize,
    /// Seed for random designs, noise and center dictionaries.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Unit of angles in CSV files.
    #[arg(long, global = true, value_enum, default_value_t = Unit::Deg)]
    pub angle_unit: Unit,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    Deg,
    Rad,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    Dlvp,
    AbelPoisson,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rbf,
    Harmonic,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Table {
    Coeffs,
    Values,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the W transform of a model on a design.
    Simulate(SimulateArgs),
    /// Tabulate Radon and W transforms of a model on a product grid.
    Transform(TransformArgs),
    /// Fit a model to a samples file.
    Fit(FitArgs),
    /// Tabulate kernel coefficients or closed-form values.
    Kernels(KernelArgs),
    /// Run the invariant suite and report measured errors.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Product design `<n_h>x<n_r>x<n_rho>`.
    #[arg(long, conflicts_with = "samples")]
    pub grid: Option<String>,
    /// Number of random probes.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Standard deviation of additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Evaluate W by torus quadrature instead of closed forms.
    #[arg(long)]
    pub quadrature: bool,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Product design `<n_h>x<n_r>x<n_rho>`.
    #[arg(long)]
    pub grid: String,
    /// Evaluate W by torus quadrature instead of closed forms.
    #[arg(long)]
    pub quadrature: bool,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Samples CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Rbf)]
    pub method: Method,
    /// Degree cap of the harmonic fit.
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = Kernel::Dlvp)]
    pub kernel: Kernel,
    #[arg(long, default_value_t = 20.0)]
    pub kappa: f64,
    /// Size of the seeded center dictionary.
    #[arg(long, default_value_t = 30)]
    pub centers: usize,
    /// RBF model JSON whose centers replace the seeded dictionary.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Tikhonov ridge parameter.
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    /// Constrain RBF weights to be nonnegative.
    #[arg(long)]
    pub nonneg: bool,
    /// Residual report (JSON); standard error when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = Kernel::Dlvp)]
    pub kernel: Kernel,
    /// Comma-separated shape parameters.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub kappa: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Table::Coeffs)]
    pub table: Table,
    /// Highest degree of the coefficient table.
    #[arg(long, default_value_t = 20)]
    pub degree: usize,
    /// Number of angles in `[0, π]` for the value table.
    #[arg(long, default_value_t = 181)]
    pub points: usize,
    /// Second angle of the double Radon column, in the I/O angle unit.
    #[arg(long, default_value_t = 0.0)]
    pub eta2: f64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Tolerance applied to every identity check.
    #[arg(long)]
    pub tol_identity: Option<f64>,
    /// Comma-separated criterion numbers; all checks when omitted.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u8>,
    /// θ-grid of the Abel reconstruction check.
    #[arg(long, default_value_t = 512)]
    pub abel_grid: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Simulate(a) => commands::simulate(&cli.common, a),
        Command::Transform(a) => commands::transform(&cli.common, a),
        Command::Fit(a) => commands::fit(&cli.common, a),
        Command::Kernels(a) => commands::kernels(&cli.common, a),
        Command::Verify(a) => commands::verify(&cli.common, a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
