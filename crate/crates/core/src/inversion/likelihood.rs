use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FaciesGrid, RealGrid, WellSet};

/// Noise level and well weighting of the data terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodSpec {
    /// Seismic amplitude noise standard deviation; the data covariance is `σ² I`.
    pub sigma: f64,
    /// Log-posterior penalty per mismatched well cell.
    pub well_weight: f64,
}

impl Default for LikelihoodSpec {
    fn default() -> Self {
        LikelihoodSpec { sigma: 0.01, well_weight: 10.0 }
    }
}

impl LikelihoodSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.well_weight >= 0.0 && self.well_weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("well weight must be >= 0, got {}", self.well_weight)));
        }
        Ok(())
    }
}

fn check_same_shape(observed: &RealGrid, synthetic: &RealGrid) -> Result<()> {
    if !observed.dims().same_shape(synthetic.dims()) {
        return Err(Error::Shape(format!(
            "observed {:?} and synthetic {:?} differ",
            observed.dims().shape(),
            synthetic.dims().shape()
        )));
    }
    Ok(())
}

/// Sum of squared residuals.
pub fn residual_sum_squares(observed: &RealGrid, synthetic: &RealGrid) -> Result<f64> {
    check_same_shape(observed, synthetic)?;
    Ok(observed.values().iter().zip(synthetic.values()).map(|(d, s)| (d - s) * (d - s)).sum())
}

/// Root-mean-square residual over all cells.
pub fn misfit_rms(observed: &RealGrid, synthetic: &RealGrid) -> Result<f64> {
    Ok((residual_sum_squares(observed, synthetic)? / observed.len() as f64).sqrt())
}

/// Log of the Gaussian likelihood with diagonal covariance `σ² I`:
/// `-N/2 ln(2πσ²) - Σ (d - d(m))² / (2σ²)`.
pub fn log_likelihood_seismic(observed: &RealGrid, synthetic: &RealGrid, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    let sse = residual_sum_squares(observed, synthetic)?;
    Ok(gaussian_log_likelihood(sse, observed.len(), sigma))
}

pub(crate) fn gaussian_log_likelihood(sse: f64, n: usize, sigma: f64) -> f64 {
    let var = sigma * sigma;
    -0.5 * n as f64 * (2.0 * PI * var).ln() - sse / (2.0 * var)
}

fn well_mismatches(grid: &FaciesGrid, wells: &WellSet) -> Result<usize> {
    wells.check_within(grid.dims())?;
    Ok(wells.observations().filter(|o| grid.get(o.i, o.j, o.k) != o.facies).count())
}

/// `-λ` times the number of well cells whose facies disagrees with `grid`.
pub fn log_likelihood_wells(grid: &FaciesGrid, wells: &WellSet, weight: f64) -> Result<f64> {
    let mismatches = well_mismatches(grid, wells)?;
    if weight == 0.0 {
        return Ok(0.0);
    }
    Ok(-weight * mismatches as f64)
}

/// Fraction of observed well cells reproduced by `grid`.
pub fn conditioning_accuracy(grid: &FaciesGrid, wells: &WellSet) -> Result<f64> {
    let total = wells.len();
    if total == 0 {
        return Err(Error::Empty("well set has no observations".into()));
    }
    let mismatches = well_mismatches(grid, wells)?;
    Ok((total - mismatches) as f64 / total as f64)
}
