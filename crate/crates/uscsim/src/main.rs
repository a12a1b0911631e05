use std::process::ExitCode;

use clap::Parser;
use uscsim::args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match uscsim::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uscsim: {e:#}");
            ExitCode::from(uscsim::exit_code(&e))
        }
    }
}
