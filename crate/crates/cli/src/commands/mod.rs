mod assess;
mod forward;
mod generate;
mod invert;
mod stats;

use anyhow::{Context, Result};
use facinv_core::GridFormat;

pub use assess::AssessArgs;
pub use forward::ForwardArgs;
pub use generate::GenerateArgs;
pub use invert::InvertArgs;
pub use stats::StatsArgs;

use crate::{usage, Cli, Command};

pub fn execute(cli: Cli) -> Result<()> {
    let requested = match cli.threads {
        Some(0) => return Err(usage("--threads must be >= 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    match cli.command {
        Command::Generate(a) => generate::run(a, requested),
        Command::Assess(a) => assess::run(a, requested),
        Command::Forward(a) => forward::run(a, requested),
        Command::Invert(a) => invert::run(a, requested),
        Command::Stats(a) => stats::run(a, requested),
    }
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().context("cannot start worker threads")?;
    pool.install(f)
}

/// Facies files use the categorical counterpart of a real-valued format.
fn facies_format(real: GridFormat) -> GridFormat {
    match real {
        GridFormat::GslibAscii => GridFormat::GslibAscii,
        GridFormat::RawF32 | GridFormat::RawU8 => GridFormat::RawU8,
    }
}

fn report_written(files: &[std::path::PathBuf], dest: &std::path::Path) {
    println!("wrote {} files to {}", files.len(), dest.display());
}
