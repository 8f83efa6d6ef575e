use std::process::ExitCode;

use clap::Parser;
use drift_spectra_cli::{run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = cli.into_config().and_then(|c| run(&c).map(|o| (c, o)));
    match result {
        Ok((config, outcome)) => {
            if config.output.path.is_some() {
                println!("{}", outcome.summary);
            } else {
                eprintln!("{}", outcome.summary);
                print!("{}", outcome.body);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("drift-spectra: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
