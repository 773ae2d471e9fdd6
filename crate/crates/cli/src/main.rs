//! `gemlogic` command-line interface.

mod args;
mod commands;
mod failure;
mod io;

use std::process;

use clap::error::ErrorKind;
use clap::Parser;
use gemlogic::Execution;

use args::{Cli, Command};
use failure::{ExitCode, Outcome};

fn run(cli: &Cli) -> Outcome<()> {
    let exec = if cli.workers == 1 { Execution::Sequential } else { Execution::Parallel };
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers as usize)
        .build_global()
        .map_err(|e| failure::Failure::new(ExitCode::Usage, e))?;
    log::debug!("{} workers", cli.workers);
    match &cli.command {
        Command::Compile(a) => commands::compile_cmd(a),
        Command::Validate(a) => commands::validate_cmd(a),
        Command::Growth(a) => commands::growth_cmd(a),
        Command::Essentiality(a) => commands::essentiality_cmd(a, exec),
        Command::Abduce(a) => commands::abduce_cmd(a, exec),
        Command::Fba(a) => commands::fba_cmd(a),
        Command::Revise(c) => commands::revise_cmd(c),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => ExitCode::Usage as i32,
            };
            let _ = e.print();
            process::exit(code);
        }
    };
    if let Err(f) = run(&cli) {
        eprintln!("error: {:#}", f.error);
        process::exit(f.code as i32);
    }
}
