mod cli;
mod commands;
mod error;
mod run;
mod scenario;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command, ScenarioCommand};
use error::{CliError, Result};

const THREADS_VAR: &str = "DUCTWARP_THREADS";

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("{THREADS_VAR}={value} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("{THREADS_VAR}: {e}")))
}

fn dispatch(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::FitDuct(a) => commands::fit_duct(a),
        Command::Modes(a) => commands::modes(a),
        Command::WkbTable(a) => commands::wkb_table(a),
        Command::Tl(a) => commands::tl(a),
        Command::Synth(a) => commands::synth(a),
        Command::Warp(a) => commands::warp(a),
        Command::Separate(a) => commands::separate(a),
        Command::Dispersion(a) => commands::dispersion(a),
        Command::Scenario(ScenarioCommand::Run(a)) => commands::scenario_run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
