use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use facinv_core::geostats::{qa_report, Neighborhood, QaConfig};
use facinv_core::grid::load_facies;
use facinv_core::GridFormat;
use serde::Deserialize;

use super::generate::realizations;
use super::{report_written, with_pool};
use crate::args::{existing, overlay, read_config, rebase, require, Triple};
use crate::output::{emit_plot_data, PlotData, Staging};
use crate::{usage, CheckFailed};

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessArgs {
    /// JSON file whose keys mirror the long options (with underscores); options win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Training image.
    #[arg(long)]
    pub ti: Option<PathBuf>,
    /// Training image extent nx,ny,nz.
    #[arg(long)]
    pub ti_dims: Option<Triple>,
    /// [default: raw_u8]
    #[arg(long)]
    pub ti_format: Option<GridFormat>,
    /// Generator weights to draw realizations from (alternative to --realizations).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Realizations drawn from --weights [default: 10].
    #[arg(long)]
    pub count: Option<usize>,
    /// Seed for drawing realizations from --weights [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Existing realization files (alternative to --weights).
    #[arg(long, num_args = 1..)]
    pub realizations: Option<Vec<PathBuf>>,
    /// Realization extent nx,ny,nz.
    #[arg(long)]
    pub realization_dims: Option<Triple>,
    /// [default: raw_u8]
    #[arg(long)]
    pub realization_format: Option<GridFormat>,
    /// Training-image patch extent [default: the realization extent].
    #[arg(long)]
    pub patch_size: Option<Triple>,
    /// [default: 100]
    #[arg(long)]
    pub patch_count: Option<usize>,
    /// Seed for patch placement [default: 0].
    #[arg(long)]
    pub patch_seed: Option<u64>,
    /// Largest lag per axis x,y,z, clamped to the grids [default: 20,20,20].
    #[arg(long)]
    pub max_lag: Option<Triple>,
    /// 6 or 26 [default: 6].
    #[arg(long)]
    pub neighborhood: Option<Neighborhood>,
    /// [default: 0.01]
    #[arg(long)]
    pub variogram_threshold: Option<f64>,
    /// [default: 0.1]
    #[arg(long)]
    pub connectivity_threshold: Option<f64>,
    /// [default: 0.02]
    #[arg(long)]
    pub proportion_threshold: Option<f64>,
    /// Exit with status 1 when the assessment fails (outputs are still written).
    #[arg(long)]
    pub strict: bool,
    /// [default: assess_out]
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

pub fn run(mut a: AssessArgs, threads: usize) -> Result<()> {
    if let Some(path) = a.config.take() {
        let (mut file, base): (AssessArgs, _) = read_config(&path)?;
        file.ti = rebase(file.ti, &base);
        file.weights = rebase(file.weights, &base);
        file.realizations = file.realizations.map(|v| v.into_iter().filter_map(|p| rebase(Some(p), &base)).collect());
        file.output_dir = rebase(file.output_dir, &base);
        a.strict |= file.strict;
        overlay!(a, file; ti, ti_dims, ti_format, weights, count, seed, realizations, realization_dims,
            realization_format, patch_size, patch_count, patch_seed, max_lag, neighborhood,
            variogram_threshold, connectivity_threshold, proportion_threshold, output_dir);
    }
    let ti_path = require(a.ti, "ti")?;
    existing(&ti_path)?;
    let ti_dims = require(a.ti_dims, "ti-dims")?.dims()?;
    let reals = match (&a.weights, &a.realizations) {
        (Some(_), Some(_)) => return Err(usage("give either --weights or --realizations, not both")),
        (None, None) => return Err(usage("one of --weights or --realizations is required")),
        (None, Some(files)) => {
            let dims = require(a.realization_dims, "realization-dims")?.dims()?;
            let format = a.realization_format.unwrap_or(GridFormat::RawU8);
            for p in files {
                existing(p)?;
            }
            files.iter().map(|p| load_facies(p, format, dims)).collect::<facinv_core::Result<Vec<_>>>()?
        }
        (Some(w), None) => {
            let count = a.count.unwrap_or(10);
            if count == 0 {
                return Err(usage("--count must be >= 1"));
            }
            with_pool(threads, || realizations(w, count, a.seed.unwrap_or(0), None))?
        }
    };
    let ti = load_facies(&ti_path, a.ti_format.unwrap_or(GridFormat::RawU8), ti_dims)?;

    let defaults = QaConfig::default();
    let real_shape = reals[0].dims().shape();
    let mut config = QaConfig {
        patch_size: a.patch_size.map(|t| t.0).unwrap_or(real_shape),
        patch_count: a.patch_count.unwrap_or(defaults.patch_count),
        max_lag: a.max_lag.map(|t| t.0).unwrap_or(defaults.max_lag),
        variogram_threshold: a.variogram_threshold.unwrap_or(defaults.variogram_threshold),
        connectivity_threshold: a.connectivity_threshold.unwrap_or(defaults.connectivity_threshold),
        proportion_threshold: a.proportion_threshold.unwrap_or(defaults.proportion_threshold),
        seed: a.patch_seed.unwrap_or(defaults.seed),
        neighborhood: a.neighborhood.unwrap_or(defaults.neighborhood),
    };
    let patch = config.patch_size;
    config.clamp_lags(reals.iter().map(|g| g.dims().shape()).chain([patch]));

    let mut staging = Staging::new(a.output_dir.unwrap_or_else(|| PathBuf::from("assess_out")))?;
    let report = with_pool(threads, || Ok(qa_report(&reals, &ti, &config)?))?;
    let mut items = Vec::new();
    for e in &report.entries {
        let stem = format!("{}_facies{}_{}", e.kind, e.facies, e.axis);
        items.push((format!("{stem}_reference.csv"), PlotData::Envelope(&e.reference)));
        items.push((format!("{stem}_realizations.csv"), PlotData::Envelope(&e.realizations)));
    }
    emit_plot_data(&items, &mut staging)?;
    let text = report.to_text();
    staging.write("qa_report.txt", text.as_bytes())?;
    let dest = staging.dest().to_path_buf();
    let files = staging.commit()?;
    report_written(&files, &dest);
    println!(
        "qa {}: variogram max deviation {:.4}, connectivity max deviation {:.4}, proportion delta {:.4}",
        if report.pass { "pass" } else { "fail" },
        report.max_deviation(facinv_core::geostats::StatKind::Variogram),
        report.max_deviation(facinv_core::geostats::StatKind::Connectivity),
        report.max_proportion_delta()
    );
    if a.strict && !report.pass {
        return Err(CheckFailed("quality assessment failed".into()).into());
    }
    Ok(())
}
