use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use nwl_cli::{run, Cli, CliError, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli).and_then(|out| emit(&cli, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn emit(cli: &Cli, out: &str) -> Result<(), CliError> {
    match &cli.command.common().out {
        Some(path) => std::fs::write(path, out)?,
        None => std::io::stdout().lock().write_all(out.as_bytes())?,
    }
    Ok(())
}
