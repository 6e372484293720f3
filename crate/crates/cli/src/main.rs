//! `mkflow`: kernels, dilations, repeated interactions and stochastic flows
//! from the command line.
//!
//! Exit codes: 0 pass, 1 check failed, 2 usage or input error, 3 statistical
//! check inconclusive.

mod args;
mod discrete;
mod error;
mod report;
mod sde;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;
use report::Status;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => ExitCode::from(status.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    if let Some(threads) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let report = match &cli.command {
        Command::Reduce(a) => discrete::reduce(a)?,
        Command::Dilate(a) => discrete::dilate(a)?,
        Command::DilateInvertible(a) => discrete::dilate_invertible(a)?,
        Command::Iterate(a) => discrete::iterate(a, cli.global.seed)?,
        Command::Defect(a) => discrete::defect(a)?,
        Command::Classify(a) => discrete::classify(a)?,
        Command::Invertible(a) => discrete::invertible(a)?,
        Command::SdeFlow(a) => sde::flow(a, cli.global.seed)?,
        Command::SdeSemigroup(a) => sde::semigroup(a, cli.global.seed)?,
        Command::SdeCheck(a) => sde::check(a, cli.global.seed)?,
    };
    report.emit(&cli.global)
}
