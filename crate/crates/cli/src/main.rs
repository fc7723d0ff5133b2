mod args;
mod commands;
mod error;
mod load;
mod plot;
mod table;

use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use quasiknow::cancel::CancelToken;

use args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(eps) = cli.eps {
        quasiknow::numerics::set_eps(eps);
    }
    let _ = ctrlc::set_handler(|| {
        CancelToken::global().cancel();
        // Give the solver a moment to notice, then stop regardless.
        std::thread::sleep(Duration::from_secs(2));
        std::process::exit(130);
    });
    match commands::run(&cli) {
        Ok(out) => match out.finish(cli.json.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => e.report(),
        },
        Err(e) => e.report(),
    }
}
