use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emhuygens_cli::commands::{self, Output};
use emhuygens_cli::error::CliError;
use emhuygens_cli::scenario::Scenario;

#[derive(Parser)]
#[command(name = "emhuygens", version, about = "Huygens surface-source reconstructions of causal electromagnetic fields")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit with status 3 when an acceptance threshold is violated.
    #[arg(long, global = true)]
    check: bool,
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run built-in algebra, operator and quadrature invariants.
    Selftest,
    /// Reconstruct the field on the scenario grid.
    Reconstruct { scenario: PathBuf },
    /// Maximum interior and exterior errors over a list of orders.
    Convergence {
        scenario: PathBuf,
        /// Comma-separated n_theta values; n_phi = 2 n_theta.
        #[arg(long, default_value = "8,16,32,64")]
        orders: String,
    },
    /// Weak energy balance of the two-cell partition.
    Poynting { scenario: PathBuf },
    /// Total surface charge and its rate over time.
    Charge { scenario: PathBuf },
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Selftest => Ok(commands::selftest()),
        Command::Reconstruct { scenario } => commands::reconstruct(&Scenario::load(scenario)?),
        Command::Convergence { scenario, orders } => {
            let orders = commands::parse_orders(orders)?;
            commands::convergence(&Scenario::load(scenario)?, &orders)
        }
        Command::Poynting { scenario } => commands::poynting(&Scenario::load(scenario)?),
        Command::Charge { scenario } => commands::charge(&Scenario::load(scenario)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        match &cli.output {
            Some(path) => std::fs::write(path, &out.text)?,
            None => std::io::stdout().write_all(out.text.as_bytes())?,
        }
        match (cli.check, out.violation) {
            (true, Some(v)) => Err(CliError::Check(v)),
            (false, Some(v)) => {
                eprintln!("warning: {v}");
                Ok(())
            }
            _ => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("emhuygens: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
