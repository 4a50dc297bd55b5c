use std::process::ExitCode;

use clap::Parser;

mod args;
mod config;
mod error;
mod output;
mod run;

use args::{Cli, Sub};
use config::Format;
use error::CliError;

/// Exit status when `--strict` and a property was violated.
const STRICT_VIOLATION: u8 = 4;

fn execute(cli: Cli) -> Result<u8, CliError> {
    if let Sub::Schema = cli.command {
        output::write(None, output::SCHEMA)?;
        return Ok(0);
    }
    let cfg = cli.command.into_config()?;
    let outcome = run::run(&cfg)?;
    let text = match cfg.format {
        Format::Json => output::render_json(&output::envelope(&cfg, outcome.result)),
        Format::Csv => output::csv_prelude(&cfg) + outcome.csv.as_deref().unwrap_or_default(),
    };
    output::write(cfg.out.as_deref(), &text)?;
    Ok(if cfg.strict && outcome.violated { STRICT_VIOLATION } else { 0 })
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
