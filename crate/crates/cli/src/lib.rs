//! Command-line front end for `lowlat-core`: WAV I/O, resampling, pipeline
//! wiring and verification commands.

pub mod args;
pub mod audio;
pub mod commands;
pub mod error;
pub mod report;
pub mod resample;

use std::io::Write;

pub use args::Cli;
pub use error::{CliError, ExitCode, Result};
pub use report::{Format, Report};

/// Runs one invocation, writing the report to `out`. A failed verification
/// still writes its report before returning the error.
pub fn run<W: Write>(cli: &Cli, mut out: W) -> Result<()> {
    let report = match commands::run(&cli.command) {
        Ok(r) => r,
        Err(CliError::Verification(r)) => {
            r.write(cli.format, &mut out).map_err(|e| CliError::io("<stdout>", e))?;
            return Err(CliError::Verification(r));
        }
        Err(e) => return Err(e),
    };
    report
        .write(cli.format, &mut out)
        .map_err(|e| CliError::io("<stdout>", e))
}
