use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tidbd_cli::commands::{self, Overrides};
use tidbd_cli::config::parse_config;

#[derive(Parser)]
#[command(name = "tidbd", version, about = "TIDBD prediction experiments")]
struct Cli {
    /// Base seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core (overrides the config).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV files plus summary.txt.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and TIDBD_OUTPUT_DIR).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the best-per-lambda table for a result directory.
    Summarize { dir: PathBuf },
    /// Print exact gridworld state values.
    Solve { gamma: f64 },
    /// Print step-size trajectories of a single run as CSV.
    Trace { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        output_dir: None,
    };
    match cli.command {
        Command::Run { config, output } => {
            overrides.output_dir = output;
            let mut cfg = parse_config(&config)?;
            overrides.apply(&mut cfg);
            let outcome = commands::run(&cfg)?;
            println!("wrote {}", outcome.output_dir.display());
            if outcome.failed_cells > 0 {
                eprintln!(
                    "{} of {} cells diverged on every run",
                    outcome.failed_cells, outcome.cells
                );
                return Ok(ExitCode::from(2));
            }
        }
        Command::Summarize { dir } => print!("{}", commands::summarize(&dir)?),
        Command::Solve { gamma } => print!("{}", commands::solve(gamma)?),
        Command::Trace { config } => {
            let mut cfg = parse_config(&config)?;
            overrides.apply(&mut cfg);
            print!("{}", commands::trace(&cfg)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}
