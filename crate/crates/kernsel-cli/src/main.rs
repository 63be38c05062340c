//! `kernsel` command-line tool: estimate curves from data, run benchmark
//! experiments and render static overlay plots.

mod commands;
mod svg;
mod tables;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "kernsel",
    version,
    about = "Kernel regression and density estimation with data-driven bandwidth selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a curve from a two-column data file
    Estimate(EstimateArgs),
    /// Run a named benchmark table and write its CSV
    Reproduce(ReproduceArgs),
    /// Overlay curve CSV files in a static SVG
    Plot(PlotArgs),
    /// Run an experiment described by a key = value config file
    Run(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Pco,
    Gl,
    Cv,
    CvNw,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    /// Density
    F,
    /// Response-weighted product b*f
    Bf,
    /// Regression function via the two-bandwidth quotient
    B,
    /// Regression function via the classical single-bandwidth estimator
    Nw,
}

#[derive(Args)]
pub struct EstimateArgs {
    /// Two-column CSV of observations (x,y); one header row is allowed
    #[arg(long)]
    data: PathBuf,
    /// Kernel preset ("order7", "gauss") or custom "coeff:var,..." pairs
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Pco)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = TargetArg::Bf)]
    target: TargetArg,
    /// A positive number, or "auto" for data-driven selection
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    #[arg(long, default_value_t = 0.01)]
    grid_min: f64,
    #[arg(long, default_value_t = 1.0)]
    grid_max: f64,
    #[arg(long, default_value_t = 75)]
    grid_count: usize,
    /// Evaluation window quantiles of the data, "p_lo,p_hi"
    #[arg(long, default_value = "0.02,0.98")]
    quantiles: String,
    /// Number of evaluation points
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Constant in the Goldenshluger-Lepski variance proxy
    #[arg(long, default_value_t = 1.0)]
    gl_constant: f64,
    /// Output curve CSV
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG rendering of the estimate
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReproduceArgs {
    /// Benchmark table id, e.g. bf_gauss_01 (see the README for the list)
    #[arg(long)]
    table: String,
    /// Replications per cell (default: the table's full 200)
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON-lines dump of every replication record
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args)]
pub struct PlotArgs {
    /// Curve CSV files to overlay (thin dashed strokes)
    #[arg(required_unless_present = "truth")]
    curves: Vec<PathBuf>,
    /// Curve CSV drawn bold red on top of the others
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output SVG
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct RunArgs {
    /// Experiment config file (key = value sections)
    #[arg(long)]
    config: PathBuf,
    /// Output report CSV
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON-lines dump of every replication record
    #[arg(long)]
    records: Option<PathBuf>,
}

fn configure_threads() {
    if let Ok(raw) = std::env::var("KERNSEL_THREADS") {
        match raw.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
            _ => eprintln!("warning: ignoring invalid KERNSEL_THREADS value '{raw}'"),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Estimate(args) => commands::estimate(args),
        Command::Reproduce(args) => commands::reproduce(args),
        Command::Plot(args) => commands::plot(args),
        Command::Run(args) => commands::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
