use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lattice_wave::runner::{resolve_workers, run_config_file, EXIT_CONFIG, EXIT_CONTRACT, EXIT_OK};
use lattice_wave::selftest::run_selftest;

#[derive(Parser)]
#[command(name = "lattice-wave", version, about = "Semiclassical lattice wave equations: solve, certify, converge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `out` in the config; default ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in closed-form oracles.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out } => run_config_file(&config, out.as_deref()),
        Command::Selftest => {
            let pool = match resolve_workers(None) {
                Ok(w) => rayon::ThreadPoolBuilder::new().num_threads(w.unwrap_or(0)).build(),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            };
            let results = match pool {
                Ok(p) => p.install(run_selftest),
                Err(_) => run_selftest(),
            };
            for r in &results {
                println!("{r}");
            }
            if results.iter().all(|r| r.pass) {
                EXIT_OK
            } else {
                EXIT_CONTRACT
            }
        }
    };
    ExitCode::from(code as u8)
}
