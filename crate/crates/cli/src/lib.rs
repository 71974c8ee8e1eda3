//! Library behind the `tfim-rfs` binary: argument resolution, the seven
//! commands, and deterministic CSV/JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};

pub use commands::execute;
pub use config::{Args, Command, Format, LambdaRange, RunConfig};
pub use error::CliError;
pub use table::{Cell, Table};

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "TFIM_RFS_THREADS";

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let threads: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{THREADS_VAR} must be a positive integer, got `{value}`"
                ))
            })?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))
}

/// Runs the command on a pool sized by `TFIM_RFS_THREADS`.
pub fn compute(cfg: &RunConfig) -> Result<Table, CliError> {
    thread_pool()?.install(|| execute(cfg))
}

/// Encodes `table` in the configured format.
pub fn render<W: Write>(cfg: &RunConfig, table: &Table, out: W) -> Result<(), CliError> {
    match cfg.output_format {
        Format::Csv => table.write_csv(out),
        Format::Json => table.write_json(&cfg.describe(), out),
    }
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args)?;
    let table = compute(&cfg)?;
    match cfg.output_path() {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut out = BufWriter::new(file);
            render(&cfg, &table, &mut out)?;
            out.flush().map_err(|e| CliError::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            render(&cfg, &table, &mut out)?;
            out.flush().map_err(|e| CliError::io("<stdout>", e))
        }
    }
}
