//! Library side of the command-line harness: experiment IO, the four
//! subcommand implementations, and their shared plumbing. The binary in
//! `main.rs` only parses flags and maps errors to exit codes.

pub mod dataset;
pub mod errors;
pub mod fit;
pub mod gram;
pub mod manifest;
pub mod matio;
pub mod resultfile;
pub mod sweep;
pub mod synth;

use errors::CliError;

/// Applies the DSCMC_THREADS cap to the global worker pool; 0 or unset
/// means automatic. Must run before any parallel work.
pub fn configure_threads() -> Result<(), CliError> {
    match std::env::var("DSCMC_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::Usage(format!("DSCMC_THREADS is unreadable: {e}"))),
        Ok(raw) => {
            let n: usize = raw.trim().parse().map_err(|_| {
                CliError::Usage(format!(
                    "DSCMC_THREADS must be a nonnegative integer, got {raw:?}"
                ))
            })?;
            if n == 0 {
                return Ok(());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot use {n} worker threads: {e}")))
        }
    }
}
