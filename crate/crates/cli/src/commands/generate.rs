use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use facinv_core::generator::{binarize, load_generator};
use facinv_core::grid::encode_facies;
use facinv_core::inversion::chain_rng;
use facinv_core::{FaciesGrid, GridFormat, LatentVector};
use rayon::prelude::*;
use serde::Deserialize;

use super::{report_written, with_pool};
use crate::args::{existing, overlay, read_config, rebase, require};
use crate::output::Staging;
use crate::usage;

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateArgs {
    /// JSON file whose keys mirror the long options (with underscores); options win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// FACGEN weight file.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Number of realizations [default: 1].
    #[arg(long)]
    pub count: Option<usize>,
    /// Realization `n` draws its latent vector from stream `n` of this seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Binarization threshold on the generator output [default: from the weights, 0].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// gslib_ascii, raw_f32 or raw_u8 [default: raw_u8].
    #[arg(long)]
    pub format: Option<GridFormat>,
    /// [default: generate_out]
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

/// `count` seeded realizations of a generator.
pub fn realizations(weights: &PathBuf, count: usize, seed: u64, threshold: Option<f64>) -> Result<Vec<FaciesGrid>> {
    existing(weights)?;
    let mut net = load_generator(weights)?;
    if let Some(t) = threshold {
        net.output_threshold = t;
    }
    let grids = (0..count)
        .into_par_iter()
        .map(|n| {
            let mut rng = chain_rng(seed, n);
            let latent = LatentVector::sample_uniform(net.input_shape, &mut rng);
            Ok(binarize(&net.generate(&latent)?, net.output_threshold))
        })
        .collect::<facinv_core::Result<Vec<_>>>()?;
    Ok(grids)
}

pub fn run(mut a: GenerateArgs, threads: usize) -> Result<()> {
    if let Some(path) = a.config.take() {
        let (mut file, base): (GenerateArgs, _) = read_config(&path)?;
        file.weights = rebase(file.weights, &base);
        file.output_dir = rebase(file.output_dir, &base);
        overlay!(a, file; weights, count, seed, threshold, format, output_dir);
    }
    let weights = require(a.weights, "weights")?;
    let count = a.count.unwrap_or(1);
    if count == 0 {
        return Err(usage("--count must be >= 1"));
    }
    let format = a.format.unwrap_or(GridFormat::RawU8);
    let mut staging = Staging::new(a.output_dir.unwrap_or_else(|| PathBuf::from("generate_out")))?;
    let grids = with_pool(threads, || realizations(&weights, count, a.seed.unwrap_or(0), a.threshold))?;
    for (n, g) in grids.iter().enumerate() {
        staging.write(&format!("realization_{n:04}.{}", format.extension()), &encode_facies(g, format))?;
    }
    let dest = staging.dest().to_path_buf();
    let files = staging.commit()?;
    report_written(&files, &dest);
    Ok(())
}
