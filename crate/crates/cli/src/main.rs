mod commands;
mod export;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wavekit::verify::VerifyMode;

/// Construct, verify, inspect and export wavelet-set regions.
#[derive(Debug, Parser)]
#[command(name = "wavekit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a region and write it as JSON.
    Construct(ConstructArgs),
    /// Check both tiling conditions for a region file.
    Verify(VerifyArgs),
    /// Diagnostics for a dilation matrix.
    Info(InfoArgs),
    /// Write a region as an OFF mesh, an SVG drawing or a CSV point cloud.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RegionType {
    NegScalar,
    Scalar,
    Matrix,
    NotchedCube,
    NotchedParallelotope,
}

/// Describes a dilation: `d·I`, `-d·I`, or an explicit matrix.
#[derive(Debug, Clone, Args)]
struct DilationArgs {
    #[arg(long = "type", value_enum, value_name = "TYPE")]
    kind: Option<RegionType>,
    #[arg(long)]
    dim: Option<usize>,
    /// Dilation factor, e.g. `2`, `3/2` or `1.25`.
    #[arg(long)]
    d: Option<String>,
    /// Row-major matrix `a,b;c,d`.
    #[arg(long)]
    matrix: Option<String>,
    /// The matrix given is the transpose `A*` rather than `A`.
    #[arg(long)]
    transpose_given: bool,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    #[command(flatten)]
    dilation: DilationArgs,
    /// Satellite shift for the positive scalar construction.
    #[arg(long)]
    k: Option<i64>,
    /// Fixed exponent for the matrix construction (default: search).
    #[arg(long)]
    q: Option<u32>,
    /// Notch ratio for the notched cube and parallelotope (default 1/d).
    #[arg(long)]
    alpha: Option<String>,
    /// Integer matrix of determinant ±1 applied to the result.
    #[arg(long)]
    unimodular: Option<String>,
    /// Write a float description instead (irrational `d`, e.g. `sqrt(2)`).
    #[arg(long)]
    float: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
    Both,
    Float,
}

impl From<ModeArg> for VerifyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => VerifyMode::Exact,
            ModeArg::Mc => VerifyMode::MonteCarlo,
            ModeArg::Both => VerifyMode::Both,
            ModeArg::Float => VerifyMode::Float,
        }
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Region JSON (or a float description).
    file: PathBuf,
    /// Dilation to check against when the file carries none, or to override it.
    #[command(flatten)]
    dilation: DilationArgs,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Float-mode membership tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Report path (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InfoArgs {
    #[command(flatten)]
    dilation: DilationArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Off,
    Svg,
    Csv,
}

#[derive(Debug, Args)]
struct ExportArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    /// Plane `xi=c` cutting a 3D region for SVG output.
    #[arg(long)]
    slice: Option<String>,
    /// Points in the CSV cloud.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Construct(args) => commands::construct(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Info(args) => commands::info(&args),
        Command::Export(args) => export::run(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
