use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use facinv_core::grid::{encode_facies, encode_real};
use facinv_core::inversion::{indicator_moments, InversionConfig};
use facinv_core::GridFormat;

use super::{facies_format, report_written, with_pool};
use crate::args::existing;
use crate::output::{emit_plot_data, PlotData, Staging};
use crate::usage;

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// JSON inversion config; the options below override its keys.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Probability of redrawing each latent entry per proposal.
    #[arg(long)]
    pub proposal_fraction: Option<f64>,
    /// Fraction of iterations discarded before sampling.
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Seismic noise standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Log-posterior penalty per mismatched well cell.
    #[arg(long)]
    pub well_weight: Option<f64>,
    #[arg(long)]
    pub output_format: Option<GridFormat>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

pub fn run(a: InvertArgs, threads: usize) -> Result<()> {
    existing(&a.config)?;
    let mut cfg = InversionConfig::load(&a.config).map_err(|e| usage(e.to_string()))?;
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { cfg.$f = v; } )* };
    }
    set!(seed, chains, iterations, proposal_fraction, burn_in, thin, sigma, well_weight, output_format, output_dir);
    existing(&cfg.weights)?;
    existing(&cfg.observed)?;
    if let Some(w) = &cfg.wells {
        existing(w)?;
    }
    if cfg.output_format == GridFormat::RawU8 {
        return Err(usage("real-valued outputs cannot use raw_u8"));
    }
    if cfg.chains == 0 {
        return Err(usage("chains must be >= 1"));
    }
    let problem = cfg.build()?;
    let mut staging = Staging::new(&cfg.output_dir)?;
    let outcome = with_pool(threads.min(cfg.chains), || Ok(problem.run()?))?;

    let real = cfg.output_format;
    let fac = facies_format(real);
    let post = &outcome.posterior;
    staging.write(&format!("posterior_probability.{}", real.extension()), &encode_real(&post.probability, real))?;
    staging.write(&format!("posterior_variance.{}", real.extension()), &encode_real(&post.variance, real))?;
    staging.write(&format!("posterior_sd.{}", real.extension()), &encode_real(&post.sd, real))?;
    staging.write(&format!("map.{}", fac.extension()), &encode_facies(&post.map, fac))?;
    for c in &outcome.chains {
        staging.write(&format!("chain_{:02}_map.{}", c.chain, fac.extension()), &encode_facies(&c.map.model, fac))?;
        let (p, _, _) = indicator_moments(c.samples.iter().map(|s| &s.model))?;
        staging.write(&format!("chain_{:02}_probability.{}", c.chain, real.extension()), &encode_real(&p, real))?;
    }
    let traces: Vec<(String, PlotData)> =
        outcome.chains.iter().map(|c| (format!("chain_{:02}_trace.csv", c.chain), PlotData::Trace(c))).collect();
    emit_plot_data(&traces, &mut staging)?;
    staging.write("summary.txt", post.summary().as_bytes())?;
    staging.write("config.json", cfg.to_json().as_bytes())?;

    let dest = staging.dest().to_path_buf();
    let files = staging.commit()?;
    report_written(&files, &dest);
    println!("map misfit sd {:.5} (chain {}), {} posterior samples", post.map_misfit, post.map_chain, post.sample_count);
    Ok(())
}
