use std::process::ExitCode;

use clap::Parser;
use mmax_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // help and version exit 0, malformed flags exit 2
        Err(e) => e.exit(),
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mmax: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
