use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use facinv_core::grid::{encode_real, load_facies};
use facinv_core::seismic::{default_half_length, ricker, AssignmentMode, ForwardModel, DEFAULT_DT, DEFAULT_FREQUENCY};
use facinv_core::{FaciesPropertyTable, GridFormat};
use serde::Deserialize;

use super::{report_written, with_pool};
use crate::args::{existing, overlay, read_config, rebase, require, Triple};
use crate::output::Staging;
use crate::usage;

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForwardArgs {
    /// JSON file whose keys mirror the long options (with underscores); options win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Facies grid to model.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Grid extent nx,ny,nz.
    #[arg(long)]
    pub dims: Option<Triple>,
    /// Input format [default: raw_u8].
    #[arg(long)]
    pub format: Option<GridFormat>,
    /// Ricker peak frequency in Hz [default: 40].
    #[arg(long)]
    pub frequency: Option<f64>,
    /// Sample interval in seconds [default: 0.001].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Wavelet half length in samples [default: ceil(3 / (f dt)) capped at nz].
    #[arg(long)]
    pub half_length: Option<usize>,
    /// JSON facies property table (`entries`, `mode`).
    #[arg(long)]
    pub properties: Option<PathBuf>,
    /// midpoint or uniform_sample; overrides the table's mode.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<AssignmentMode>,
    /// Seed for uniform_sample property draws [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Format of the seismic and impedance cubes [default: raw_f32].
    #[arg(long)]
    pub output_format: Option<GridFormat>,
    /// [default: forward_out]
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

fn parse_mode(s: &str) -> std::result::Result<AssignmentMode, String> {
    match s {
        "midpoint" => Ok(AssignmentMode::Midpoint),
        "uniform_sample" => Ok(AssignmentMode::UniformSample),
        other => Err(format!("unknown property mode `{other}`, expected midpoint or uniform_sample")),
    }
}

pub fn run(mut a: ForwardArgs, threads: usize) -> Result<()> {
    if let Some(path) = a.config.take() {
        let (mut file, base): (ForwardArgs, _) = read_config(&path)?;
        file.input = rebase(file.input, &base);
        file.properties = rebase(file.properties, &base);
        file.output_dir = rebase(file.output_dir, &base);
        overlay!(a, file; input, dims, format, frequency, dt, half_length, properties, mode, seed, output_format, output_dir);
    }
    let input = require(a.input, "input")?;
    existing(&input)?;
    let dims = require(a.dims, "dims")?.dims()?;
    let mut table = match &a.properties {
        Some(p) => {
            let (t, _): (FaciesPropertyTable, _) = read_config(p)?;
            t
        }
        None => FaciesPropertyTable::default(),
    };
    if let Some(m) = a.mode {
        table.mode = m;
    }
    let frequency = a.frequency.unwrap_or(DEFAULT_FREQUENCY);
    let dt = a.dt.unwrap_or(DEFAULT_DT);
    if !(frequency > 0.0 && dt > 0.0) {
        return Err(usage("--frequency and --dt must be positive"));
    }
    let half = a.half_length.unwrap_or_else(|| default_half_length(frequency, dt).min(dims.nz));
    let output_format = a.output_format.unwrap_or(GridFormat::RawF32);
    if output_format == GridFormat::RawU8 {
        return Err(usage("real-valued outputs cannot use raw_u8"));
    }
    let mut staging = Staging::new(a.output_dir.unwrap_or_else(|| PathBuf::from("forward_out")))?;

    let grid = load_facies(&input, a.format.unwrap_or(GridFormat::RawU8), dims)?;
    let mut model = ForwardModel::new(table, ricker(frequency, dt, half)?)?;
    model.seed = Some(a.seed.unwrap_or(0));
    let (impedance, seismic) = with_pool(threads, || {
        let elastic = model.elastic(&grid)?;
        Ok((elastic.impedance(), model.seismic(&grid)?))
    })?;
    let ext = output_format.extension();
    staging.write(&format!("seismic.{ext}"), &encode_real(&seismic, output_format))?;
    staging.write(&format!("impedance.{ext}"), &encode_real(&impedance, output_format))?;
    staging.write("wavelet.csv", model.wavelet.to_csv().as_bytes())?;
    let dest = staging.dest().to_path_buf();
    let files = staging.commit()?;
    report_written(&files, &dest);
    Ok(())
}
