//! `mvgraph`: generate synthetic manifold-valued data, add noise, build
//! graphs, denoise, evaluate and export, and run experiment recipes.

mod commands;
mod recipe;

use std::process::ExitCode;

use clap::Parser;

use commands::Cli;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<mvgraph::Error>())
        .any(mvgraph::Error::is_numerical);
    if numerical {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
