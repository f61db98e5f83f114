mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Outcome;
use config::RunConfig;

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Limit(common) => commands::limit(&RunConfig::resolve(&common, None)?),
        Command::Clt { common, cross_check } => commands::clt(&RunConfig::resolve(&common, None)?, cross_check),
        Command::Fluid { common, t_max, points } => commands::fluid(&RunConfig::resolve(&common, None)?, t_max, points),
        Command::Simulate { common, sim, dump } => {
            commands::simulate(&RunConfig::resolve(&common, Some(&sim))?, dump.as_deref())
        }
        Command::Verify { common, sim, include_minor } => {
            commands::verify_cmd(&RunConfig::resolve(&common, Some(&sim))?, include_minor)
        }
        Command::Presets(out) => commands::presets(&out),
        Command::Oracle { common, max_n } => commands::oracle(&RunConfig::resolve(&common, None)?, max_n),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
