use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use glsn_cli::args::Cli;

/// Sizes the global rayon pool from `GLSN_THREADS` when it is set.
fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("GLSN_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("GLSN_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| glsn_cli::commands::run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
