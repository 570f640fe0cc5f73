use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use facinv_core::geostats::{ensemble_envelope, grid_curves, Envelope, Neighborhood, StatCurve};
use facinv_core::grid::{facies_proportions, load_facies};
use facinv_core::GridFormat;
use rayon::prelude::*;
use serde::Deserialize;

use super::{report_written, with_pool};
use crate::args::{existing, overlay, read_config, rebase, require, Triple};
use crate::output::{emit_plot_data, PlotData, Staging};

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsArgs {
    /// JSON file whose keys mirror the long options (with underscores); options win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Facies grids, all of the same extent.
    #[arg(long, num_args = 0..)]
    pub inputs: Option<Vec<PathBuf>>,
    /// Grid extent nx,ny,nz.
    #[arg(long)]
    pub dims: Option<Triple>,
    /// [default: raw_u8]
    #[arg(long)]
    pub format: Option<GridFormat>,
    /// Largest lag per axis x,y,z, clamped to the grid [default: 20,20,20].
    #[arg(long)]
    pub max_lag: Option<Triple>,
    /// Connectivity neighbourhood, 6 or 26 [default: 6].
    #[arg(long)]
    pub neighborhood: Option<Neighborhood>,
    /// [default: stats_out]
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

fn curve_name(c: &StatCurve) -> String {
    format!("{}_facies{}_{}", c.kind, c.facies, c.axis)
}

pub fn run(mut a: StatsArgs, threads: usize) -> Result<()> {
    if let Some(path) = a.config.take() {
        let (mut file, base): (StatsArgs, _) = read_config(&path)?;
        file.inputs = file.inputs.map(|v| v.into_iter().filter_map(|p| rebase(Some(p), &base)).collect());
        file.output_dir = rebase(file.output_dir, &base);
        overlay!(a, file; inputs, dims, format, max_lag, neighborhood, output_dir);
    }
    let inputs = a.inputs.unwrap_or_default();
    for p in &inputs {
        existing(p)?;
    }
    let mut staging = Staging::new(a.output_dir.unwrap_or_else(|| PathBuf::from("stats_out")))?;
    let format = a.format.unwrap_or(GridFormat::RawU8);
    let neighborhood = a.neighborhood.unwrap_or_default();

    let mut curves: Vec<Vec<StatCurve>> = Vec::new();
    let mut proportions = String::from("grid,facies,proportion\n");
    if !inputs.is_empty() {
        let dims = require(a.dims, "dims")?.dims()?;
        let mut max_lag = a.max_lag.map(|t| t.0).unwrap_or([20; 3]);
        for (lag, n) in max_lag.iter_mut().zip(dims.shape()) {
            *lag = (*lag).min(n - 1);
        }
        let grids = inputs.iter().map(|p| load_facies(p, format, dims)).collect::<facinv_core::Result<Vec<_>>>()?;
        for (n, g) in grids.iter().enumerate() {
            for (code, p) in facies_proportions(g) {
                let _ = writeln!(proportions, "{n},{code},{p:?}");
            }
        }
        curves = with_pool(threads, || {
            Ok(grids.par_iter().map(|g| grid_curves(g, max_lag, neighborhood)).collect::<facinv_core::Result<Vec<_>>>()?)
        })?;
    }

    let envelopes: Vec<Envelope> = match curves.first() {
        Some(first) => (0..first.len())
            .map(|slot| ensemble_envelope(&curves.iter().map(|c| c[slot].clone()).collect::<Vec<_>>()))
            .collect::<facinv_core::Result<_>>()?,
        None => Vec::new(),
    };
    let mut items: Vec<(String, PlotData)> = Vec::new();
    for (n, grid_curves) in curves.iter().enumerate() {
        for c in grid_curves {
            items.push((format!("grid{n:03}_{}.csv", curve_name(c)), PlotData::Curve(c)));
        }
    }
    for e in &envelopes {
        items.push((format!("envelope_{}_facies{}_{}.csv", e.kind, e.facies, e.axis), PlotData::Envelope(e)));
    }
    emit_plot_data(&items, &mut staging)?;
    staging.write("proportions.csv", proportions.as_bytes())?;
    let dest = staging.dest().to_path_buf();
    let files = staging.commit()?;
    report_written(&files, &dest);
    Ok(())
}
