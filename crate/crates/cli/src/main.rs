//! `wordsem`: mine concepts, render datasets, train, evaluate and query.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 numeric
//! failure.

mod args;
mod commands;
mod table;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use wordsem::Error;

use args::{Cli, Command};

/// Failure of one invocation, already classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Library(e.into())
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Library(Error::Param(_)) => 1,
            Failure::Library(Error::Numeric(_)) => 3,
            Failure::Library(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Library(e) => e.fmt(f),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("wordsem: cannot size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Mine(a) => commands::mine(a, cli.force),
        Command::Synth(a) => commands::synth(a, cli.force),
        Command::Train(a) => commands::train(a, cli.force),
        Command::Eval(a) => commands::eval(a, cli.force),
        Command::CropEval(a) => commands::crop_eval(a, cli.force),
        Command::Zeroshot(a) => commands::zeroshot(a, cli.force),
        Command::Finetune(a) => commands::finetune(a, cli.force),
        Command::Query(a) => commands::query(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wordsem: {f}");
            ExitCode::from(f.code())
        }
    }
}
