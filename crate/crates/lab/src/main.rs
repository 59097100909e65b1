use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use graphing_lab::cli::{run, Cli};
use graphing_lab::error::EXIT_UNRESOLVED;
use graphing_lab::LabError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("graphing-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, LabError> {
    let report = run(cli)?;
    match &cli.out {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            report.write(cli.format, &mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            report.write(cli.format, &mut out)?;
            out.flush()?;
        }
    }
    Ok(if cli.require_resolved && report.unresolved { EXIT_UNRESOLVED } else { 0 })
}
