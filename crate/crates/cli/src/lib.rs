//! Command-line driver for the `vqd-core` experiments.
//!
//! Each subcommand has a `cmd_*` function that does the work and returns a
//! report; [`run`] renders the report (JSON for single solves and bounds,
//! CSV for tables) and writes it. Every output starts with the full argument
//! set, so a file can be regenerated from its own header.

pub mod args;
pub mod commands;
pub mod output;

pub use args::{Cli, Command};
pub use commands::{cmd_accumulate, cmd_bounds, cmd_budget, cmd_spectrum, cmd_vqd};

use anyhow::{bail, Result};

/// Runs one subcommand. Fails when any requested output could not be
/// produced, including fixtures skipped by `spectrum`.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Vqd(a) => output::emit(a.out.as_deref(), &cmd_vqd(a)?.render()?),
        Command::Spectrum(a) => {
            let table = cmd_spectrum(a)?;
            output::emit(a.out.as_deref(), &table.render()?)?;
            for f in &table.failures {
                eprintln!("warning: skipped {}: {}", f.path.display(), f.error);
            }
            if !table.failures.is_empty() {
                bail!("{} fixture(s) failed", table.failures.len());
            }
            Ok(())
        }
        Command::Budget(a) => output::emit(a.out.as_deref(), &cmd_budget(a)?.render()?),
        Command::Accumulate(a) => output::emit(a.out.as_deref(), &cmd_accumulate(a)?.render()?),
        Command::Bounds(a) => output::emit(a.out.as_deref(), &cmd_bounds(a)?.render()?),
    }
}
