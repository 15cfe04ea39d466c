mod analysis;
mod cli;
mod error;
mod ingest;
mod render;
mod simulate;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::CliResult;

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Test(args) => {
            let report = analysis::run(&args)?;
            let mut out = std::io::stdout().lock();
            out.write_all(render::render(&report, args.format).as_bytes())?;
            out.flush()?;
            Ok(())
        }
        Command::Simulate(args) => simulate::simulate(&args),
        Command::Power(args) => simulate::power(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
