use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use momentot_cli::config::OrderRange;
use momentot_cli::{run, Command, Overrides};

/// Optimal transport between measures given by moments, solved with
/// moment-SoS relaxations.
///
/// Exit codes: 0 success, 1 configuration or input error, 2 solver
/// failure, 3 fixed-point iteration did not converge (best iterate written).
#[derive(Parser)]
#[command(name = "momentot", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one relaxation order.
    Solve(Args),
    /// Solve a range of orders and write summary.csv.
    Sweep(Args),
    /// Christoffel-function support estimate on a grid.
    Support(Args),
    /// Gromov-Wasserstein fixed-point iteration.
    Gw(Args),
    /// Barycenters, one run per weight vector.
    Barycenter(Args),
    /// Write the relaxation in SDPA sparse format.
    ExportSdpa(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Relaxation order.
    #[arg(long)]
    order: Option<usize>,
    /// Inclusive order range `a..b`.
    #[arg(long)]
    orders: Option<OrderRange>,
    /// Markov parameter of the support threshold, in (0, 1).
    #[arg(long)]
    eta: Option<f64>,
    /// Grid resolution `NxM` (or `N` for every axis).
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    /// Seed for generated samples.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Debug)]
struct Grid(Vec<usize>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.split('x')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(0) => Err("grid resolution must be positive".to_string()),
            Ok(n) => Ok(n),
            Err(e) => Err(format!("bad grid {s:?}: {e}")),
        })
        .collect::<Result<_, _>>()
        .map(Grid)
}

fn main() -> ExitCode {
    // Usage errors share exit code 1 with other input errors.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    let (command, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Support(a) => (Command::Support, a),
        Cmd::Gw(a) => (Command::Gw, a),
        Cmd::Barycenter(a) => (Command::Barycenter, a),
        Cmd::ExportSdpa(a) => (Command::ExportSdpa, a),
    };
    let overrides = Overrides {
        order: args.order,
        orders: args.orders,
        eta: args.eta,
        grid: args.grid.map(|g| g.0),
        seed: args.seed,
    };
    match run(command, &args.config, &args.out, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("momentot {}: {}", command.name(), f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
