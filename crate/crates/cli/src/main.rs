//! `pfair`: solve, verify and simulate proportional-fair airtime allocations.
//!
//! Exit codes: 0 success, 1 bad input or infeasible allocation, 2 solver
//! did not converge, 3 allocation fails the KKT check.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "pfair", version, about = "Proportional-fair airtime allocation over multi-channel, multi-rate networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the proportional-fair allocation of a rate matrix.
    Solve(SolveArgs),
    /// Check an allocation against the KKT conditions.
    Verify(VerifyArgs),
    /// Run Monte-Carlo WLAN experiments and write a results CSV.
    Simulate(SimulateArgs),
}

#[derive(Args)]
pub struct SolveArgs {
    /// Rate matrix CSV: one line per user, one column per channel.
    pub input: PathBuf,
    /// general, 2user, 2channel or auto.
    #[arg(long, default_value = "auto")]
    pub algorithm: String,
    /// JSON array of per-user weights.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Solver configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path for the solution JSON (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Rate matrix CSV.
    pub matrix: PathBuf,
    /// Allocation JSON: a U x S array, or an object with an "allocation" key.
    pub allocation: PathBuf,
    /// Largest acceptable KKT residual.
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    /// JSON array of per-user weights.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario JSON.
    pub scenario: PathBuf,
    /// Output path for the results CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Sweep one axis: num_stas=8,16,32 or hotspot_load=0.0625,0.5,1.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Override the scenario's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated schemes (PF, MT, SS-TF, SS-AF); all by default.
    #[arg(long)]
    pub schemes: Option<String>,
    /// Solver configuration JSON for the PF scheme.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run replications one at a time instead of in parallel.
    #[arg(long)]
    pub sequential: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => commands::solve(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Simulate(args) => commands::simulate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
