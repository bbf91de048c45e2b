mod args;
mod commands;
mod failure;
mod report;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Degrade(a) => commands::degrade(&a),
        Command::Deblur(a) => commands::deblur(&a),
        Command::Sr(a) => commands::sr(&a),
        Command::Demosaic(a) => commands::demosaic(&a),
        Command::Psnr(a) => commands::psnr(&a),
        Command::Histogram(a) => commands::histogram(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Serve(a) => commands::serve(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pnpir: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
