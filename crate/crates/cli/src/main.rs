mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use projectnet::Error;

use args::{Cli, Command};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::InvalidArgument(_) | Error::Config(_) => EXIT_USAGE,
        Error::NonFinite(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

fn run(cli: &Cli) -> projectnet::Result<()> {
    match &cli.command {
        Command::BuildVocab(a) => commands::build_vocab(a),
        Command::Stats(a) => commands::stats(a),
        Command::Train(a) => commands::train(a),
        Command::EvalAnalogy(a) => commands::eval_analogy(a),
        Command::EvalSimilarity(a) => commands::eval_similarity(a),
        Command::RankSweep(a) => commands::rank_sweep_cmd(a),
        Command::Export(a) => commands::export_cmd(a),
    }
}

fn main() -> ExitCode {
    let argv = match config::splice_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
