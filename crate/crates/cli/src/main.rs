mod args;
mod commands;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};
use commands::{resolve_budget, CliError, Outcome};
use report::Timing;

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let common = cli.command.common().clone();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let budget = resolve_budget(common.budget)?;
    let start = Instant::now();
    let mut outcome = match &cli.command {
        Command::Weights { common, method } => commands::weights(common, *method, budget)?,
        Command::Designs {
            common,
            sampling,
            weight,
            verify,
            blocks_dir,
        } => commands::designs(
            common,
            *sampling,
            *weight,
            *verify,
            blocks_dir.as_deref(),
            budget,
        )?,
        Command::Sums { common, a, b } => commands::sums(common, a.zip(*b), budget)?,
        Command::Invariance { common, sampling } => commands::invariance(common, *sampling)?,
        Command::Params { common } => commands::params(common)?,
    };
    if common.timing {
        outcome.report.timing = Some(Timing {
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let text = outcome.report.render(common.format);
    match &common.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) if outcome.failed => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
