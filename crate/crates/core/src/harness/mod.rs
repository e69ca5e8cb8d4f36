//! Configuration, commands and output writers behind the `viscolab` binary.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

pub use commands::{execute, CommandOutcome, ExitStatus};
pub use config::{Command, RunSpec};

use crate::error::Error;
use output::Report;

/// Overrides from the command line, applied on top of the config document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn input_error(e: Error) -> CommandOutcome {
    let mut report = Report::default();
    report.put("status", ExitStatus::InputError.code());
    report.put("error", &e);
    CommandOutcome {
        status: ExitStatus::InputError,
        report,
        message: Some(e.to_string()),
    }
}

/// Parses `text`, applies `overrides` and executes the command. The output
/// directory is `overrides.out`, else the `output` key, else `.`.
pub fn run_document(text: &str, overrides: &Overrides) -> CommandOutcome {
    let mut spec = match RunSpec::parse_for(text, overrides.command) {
        Ok(s) => s,
        Err(e) => return input_error(e),
    };
    if let Some(seed) = overrides.seed {
        spec.seed = seed;
    }
    let out = overrides
        .out
        .clone()
        .or_else(|| spec.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    execute(&spec, Path::new(&out))
}
