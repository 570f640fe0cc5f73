//! Command-line front end for the facies inversion toolkit.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 1 on a domain error, 2 on a usage error.

mod args;
mod commands;
pub mod output;

use std::ffi::OsString;
use std::fmt;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub use args::Triple;
pub use commands::{AssessArgs, ForwardArgs, GenerateArgs, InvertArgs, StatsArgs};

#[derive(Debug, Parser)]
#[command(name = "facinv", version, about = "Seismic facies inversion with a generative geological prior")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "FACINV_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample facies realizations from generator weights.
    Generate(GenerateArgs),
    /// Compare realizations with training-image patches.
    Assess(AssessArgs),
    /// Forward-model a facies grid into a seismic cube.
    Forward(ForwardArgs),
    /// Run the Metropolis chains and write posterior summaries.
    Invert(InvertArgs),
    /// Facies proportions, variograms and connectivity curves of grids.
    Stats(StatsArgs),
}

/// Invalid invocation: bad flag values, missing inputs, malformed config.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Domain failure that is reported after outputs were written, e.g. a failed
/// QA under `--strict`.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let rendered = e.render().to_string();
            let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("error: invalid arguments");
            eprintln!("{}", line.trim());
            return 2;
        }
    };
    match commands::execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            let msg = format!("{err:#}").replace('\n', " ");
            if err.downcast_ref::<UsageError>().is_some() {
                eprintln!("usage error: {msg}");
                2
            } else {
                eprintln!("error: {msg}");
                1
            }
        }
    }
}
