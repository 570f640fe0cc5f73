//! Bayesian inversion in the generator's latent space.
//!
//! Independent Metropolis chains sample latent vectors `θ ~ U(-1, 1)`; each
//! proposal redraws a random subset of entries. A state is scored by
//! generating its facies model, forward modeling the seismic response and
//! comparing it with the observed cube (Gaussian noise) and the well logs
//! (per-cell penalty).

mod likelihood;
mod posterior;
mod problem;
mod sampler;

pub use likelihood::{
    conditioning_accuracy, log_likelihood_seismic, log_likelihood_wells, misfit_rms, residual_sum_squares, LikelihoodSpec,
};
pub use posterior::{indicator_moments, posterior_stats, ChainMisfit, PosteriorStats};
pub use problem::{centered_crop, ContinuousTarget, InversionConfig, InversionOutcome, InversionProblem};
pub use sampler::{
    chain_rng, metropolis_accept, propose, run_chain, run_chains, ChainResult, ChainSample, ChainSettings, ChainState,
    Evaluation, Target, TraceRow,
};
