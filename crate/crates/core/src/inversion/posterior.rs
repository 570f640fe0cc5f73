use std::fmt::Write as _;

use super::sampler::ChainResult;
use crate::error::{Error, Result};
use crate::grid::{FaciesGrid, RealGrid, CHANNEL};

/// Misfit summary of one chain's retained samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainMisfit {
    pub chain: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Misfit of the chain's best state.
    pub map: f64,
    pub map_log_posterior: f64,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorStats {
    /// Per-cell posterior channel probability.
    pub probability: RealGrid,
    /// `p (1 - p)` per cell.
    pub variance: RealGrid,
    pub sd: RealGrid,
    /// Highest log-posterior state over all chains.
    pub map: FaciesGrid,
    pub map_log_posterior: f64,
    pub map_misfit: f64,
    pub map_chain: usize,
    pub sample_count: usize,
    pub chains: Vec<ChainMisfit>,
}

impl PosteriorStats {
    /// `key = value` summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "samples = {}", self.sample_count);
        let _ = writeln!(out, "map.chain = {}", self.map_chain);
        let _ = writeln!(out, "map.log_posterior = {:?}", self.map_log_posterior);
        let _ = writeln!(out, "map.misfit_sd = {:?}", self.map_misfit);
        let mean_p = self.probability.values().iter().sum::<f64>() / self.probability.len() as f64;
        let mean_sd = self.sd.values().iter().sum::<f64>() / self.sd.len() as f64;
        let _ = writeln!(out, "posterior.mean_channel_probability = {mean_p:?}");
        let _ = writeln!(out, "posterior.mean_sd = {mean_sd:?}");
        for c in &self.chains {
            let _ = writeln!(
                out,
                "chain{:02}.misfit_sd = min {:?} mean {:?} max {:?} map {:?}",
                c.chain, c.min, c.mean, c.max, c.map
            );
            let _ = writeln!(out, "chain{:02}.acceptance_rate = {:?}", c.chain, c.acceptance_rate);
        }
        out
    }
}

/// Per-cell channel probability, variance and SD of a set of facies grids.
pub fn indicator_moments<'a>(grids: impl IntoIterator<Item = &'a FaciesGrid>) -> Result<(RealGrid, RealGrid, RealGrid)> {
    let mut iter = grids.into_iter();
    let first = iter.next().ok_or_else(|| Error::Empty("posterior needs at least one sample".into()))?;
    let dims = *first.dims();
    let mut counts = vec![0u32; dims.len()];
    let mut n = 0usize;
    for g in std::iter::once(first).chain(iter) {
        if !g.dims().same_shape(&dims) {
            return Err(Error::Shape("posterior samples differ in shape".into()));
        }
        for (c, &v) in counts.iter_mut().zip(g.values()) {
            *c += (v == CHANNEL) as u32;
        }
        n += 1;
    }
    let p: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let var: Vec<f64> = p.iter().map(|&p| p * (1.0 - p)).collect();
    let sd: Vec<f64> = var.iter().map(|v| v.sqrt()).collect();
    Ok((RealGrid::from_vec_unchecked(dims, p), RealGrid::from_vec_unchecked(dims, var), RealGrid::from_vec_unchecked(dims, sd)))
}

/// Pools the retained samples of all chains.
pub fn posterior_stats(chains: &[ChainResult<FaciesGrid>]) -> Result<PosteriorStats> {
    let samples: Vec<&FaciesGrid> = chains.iter().flat_map(|c| c.samples.iter().map(|s| &s.model)).collect();
    let (probability, variance, sd) = indicator_moments(samples.iter().copied())?;
    // first chain wins ties, so the choice is independent of scheduling
    let best = chains
        .iter()
        .reduce(|a, b| if b.map.log_posterior > a.map.log_posterior { b } else { a })
        .expect("non-empty: samples exist");
    let summaries = chains
        .iter()
        .map(|c| {
            let misfits: Vec<f64> = c.samples.iter().map(|s| s.misfit_rms).collect();
            let (min, mean, max) = if misfits.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN)
            } else {
                (
                    misfits.iter().copied().fold(f64::INFINITY, f64::min),
                    misfits.iter().sum::<f64>() / misfits.len() as f64,
                    misfits.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            ChainMisfit {
                chain: c.chain,
                min,
                mean,
                max,
                map: c.map.misfit_rms,
                map_log_posterior: c.map.log_posterior,
                acceptance_rate: c.acceptance_rate(),
            }
        })
        .collect();
    Ok(PosteriorStats {
        probability,
        variance,
        sd,
        map: best.map.model.clone(),
        map_log_posterior: best.map.log_posterior,
        map_misfit: best.map.misfit_rms,
        map_chain: best.chain,
        sample_count: samples.len(),
        chains: summaries,
    })
}
