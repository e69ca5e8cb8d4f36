use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use viscolab::harness::{run_document, Command, ExitStatus, Overrides};

/// Viscoelasticity laboratory: constitutive checks, Korn constants and a
/// finite-difference solver.
#[derive(Parser, Debug)]
#[command(name = "viscolab", version)]
struct Cli {
    /// One of: check, korn, simulate, convergence
    command: Command,
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the `output` key)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides the `seed` key)
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ExitStatus::InputError.code() as u8 } else { 0 });
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(ExitStatus::InputError.code() as u8);
        }
    };
    let overrides = Overrides {
        command: Some(cli.command),
        out: cli.out,
        seed: cli.seed,
    };
    let outcome = run_document(&text, &overrides);
    print!("{}", outcome.report.render());
    if let Some(msg) = &outcome.message {
        eprintln!("error: {msg}");
    }
    ExitCode::from(outcome.status.code() as u8)
}
