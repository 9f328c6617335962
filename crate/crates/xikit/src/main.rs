use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xikit::runners::check_catalogue;
use xikit::{run_scenario, Kind, RunOptions};

#[derive(Parser)]
#[command(name = "xikit", version, about = "Spectral shift operators and functions: scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write `report.txt` plus CSV tables.
    Run {
        config: PathBuf,
        /// Output directory (default: `output_dir` from the scenario).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long, env = "XIKIT_THREADS")]
        threads: Option<usize>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the checks of a scenario kind with their default tolerances.
    ListChecks {
        #[arg(value_parser = clap::value_parser!(String))]
        kind: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListChecks { kind } => match kind.parse::<Kind>() {
            Ok(kind) => {
                for (name, tol, what) in check_catalogue(kind) {
                    println!("{name:<24} {tol:<10e} {what}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Run { config, out, threads, seed } => {
            if let Some(n) = threads {
                if n == 0 {
                    eprintln!("error: --threads must be positive");
                    return ExitCode::from(2);
                }
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(3);
                }
            }
            match run_scenario(&config, &RunOptions { out, seed }) {
                Ok((report, dir)) => {
                    print!("{}", report.render());
                    println!("report written to {}", dir.join("report.txt").display());
                    if report.all_passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
