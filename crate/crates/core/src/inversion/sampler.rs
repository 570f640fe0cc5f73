//! Metropolis sampling over generator latent vectors.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{LatentShape, LatentVector};

/// Something a chain can sample: maps a latent vector to a log-posterior
/// (up to a constant) plus the model it stands for.
pub trait Target: Sync {
    type Model: Clone + Send;

    fn latent_shape(&self) -> LatentShape;

    fn evaluate(&self, latent: &LatentVector) -> Result<Evaluation<Self::Model>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<M> {
    pub log_posterior: f64,
    /// RMS data residual.
    pub misfit_rms: f64,
    pub model: M,
}

/// Chain length, proposal and retention settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainSettings {
    pub iterations: usize,
    /// Probability that each latent entry is redrawn by a proposal.
    pub proposal_fraction: f64,
    /// Leading fraction of iterations discarded before retaining samples.
    pub burn_in: f64,
    /// Keep every `thin`-th iteration after burn-in.
    pub thin: usize,
    pub seed: u64,
}

impl Default for ChainSettings {
    fn default() -> Self {
        ChainSettings { iterations: 30_000, proposal_fraction: 0.1, burn_in: 0.5, thin: 10, seed: 0 }
    }
}

impl ChainSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.proposal_fraction > 0.0 && self.proposal_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!("proposal fraction must lie in (0, 1], got {}", self.proposal_fraction)));
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::InvalidParameter(format!("burn-in must lie in [0, 1), got {}", self.burn_in)));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thinning interval must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of leading iterations discarded.
    pub fn burn_in_iterations(&self) -> usize {
        (self.burn_in * self.iterations as f64).floor() as usize
    }

    /// Whether iteration `it` (0 = initial state) is retained.
    pub fn retains(&self, it: usize) -> bool {
        let burn = self.burn_in_iterations();
        it >= burn && (it - burn).is_multiple_of(self.thin)
    }
}

/// Chain RNG: the ChaCha stream of the base seed selected by the chain index.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// Redraws each entry from `U(-1, 1)` with probability `fraction`, keeping it
/// otherwise. The kernel is symmetric, so no Hastings correction is needed.
/// `fraction = 0` is accepted and returns `theta` unchanged.
pub fn propose<R: Rng + ?Sized>(theta: &LatentVector, fraction: f64, rng: &mut R) -> LatentVector {
    debug_assert!((0.0..=1.0).contains(&fraction));
    let mut out = theta.clone();
    for n in 0..out.len() {
        if rng.random::<f64>() < fraction {
            out.set(n, rng.random_range(-1.0..=1.0));
        }
    }
    out
}

/// Metropolis criterion: accept when `u < min(1, exp(candidate - current))`.
pub fn metropolis_accept(current: f64, candidate: f64, u: f64) -> bool {
    u < (candidate - current).exp().min(1.0)
}

/// Current position of one chain.
#[derive(Debug, Clone)]
pub struct ChainState<M> {
    pub latent: LatentVector,
    pub model: M,
    pub log_posterior: f64,
    pub misfit_rms: f64,
    pub iteration: usize,
    pub accepted: usize,
}

impl<M> ChainState<M> {
    pub fn new(latent: LatentVector, evaluation: Evaluation<M>) -> Self {
        ChainState {
            latent,
            model: evaluation.model,
            log_posterior: evaluation.log_posterior,
            misfit_rms: evaluation.misfit_rms,
            iteration: 0,
            accepted: 0,
        }
    }

    /// Applies the Metropolis criterion to a candidate and adopts it on
    /// acceptance. Advances the iteration counter either way.
    pub fn metropolis_step(&mut self, latent: LatentVector, candidate: Evaluation<M>, u: f64) -> bool {
        self.iteration += 1;
        let accept = metropolis_accept(self.log_posterior, candidate.log_posterior, u);
        if accept {
            self.latent = latent;
            self.model = candidate.model;
            self.log_posterior = candidate.log_posterior;
            self.misfit_rms = candidate.misfit_rms;
            self.accepted += 1;
        }
        accept
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.iteration == 0 {
            0.0
        } else {
            self.accepted as f64 / self.iteration as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainSample<M> {
    pub iteration: usize,
    pub latent: LatentVector,
    pub log_posterior: f64,
    pub misfit_rms: f64,
    pub model: M,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub log_posterior: f64,
    /// Highest log-posterior seen up to this iteration.
    pub best_log_posterior: f64,
    pub acceptance_rate: f64,
    pub misfit_rms: f64,
}

#[derive(Debug, Clone)]
pub struct ChainResult<M> {
    pub chain: usize,
    /// Retained post-burn-in states.
    pub samples: Vec<ChainSample<M>>,
    /// One row per iteration, starting with the initial state.
    pub trace: Vec<TraceRow>,
    pub accepted: usize,
    pub iterations: usize,
    /// Best state visited by the chain.
    pub map: ChainSample<M>,
}

impl<M> ChainResult<M> {
    pub fn acceptance_rate(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.accepted as f64 / self.iterations as f64
        }
    }

    /// `iteration,log_posterior,best_log_posterior,acceptance_rate,misfit_sd`
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,log_posterior,best_log_posterior,acceptance_rate,misfit_sd\n");
        for r in &self.trace {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?},{:?}",
                r.iteration, r.log_posterior, r.best_log_posterior, r.acceptance_rate, r.misfit_rms
            );
        }
        out
    }
}

fn snapshot<M: Clone>(state: &ChainState<M>) -> ChainSample<M> {
    ChainSample {
        iteration: state.iteration,
        latent: state.latent.clone(),
        log_posterior: state.log_posterior,
        misfit_rms: state.misfit_rms,
        model: state.model.clone(),
    }
}

fn finite<M>(e: Evaluation<M>) -> Result<Evaluation<M>> {
    if e.log_posterior.is_finite() {
        Ok(e)
    } else {
        Err(Error::InvalidParameter(format!("non-finite log-posterior {}", e.log_posterior)))
    }
}

/// Runs one chain. The outcome depends only on the target, the settings and
/// `chain`.
///
/// Each iteration draws a proposal, evaluates it and applies the Metropolis
/// criterion. A proposal that leaves every entry unchanged is accepted without
/// re-evaluating the target.
pub fn run_chain<T: Target>(target: &T, settings: &ChainSettings, chain: usize) -> Result<ChainResult<T::Model>> {
    settings.validate()?;
    let mut rng = chain_rng(settings.seed, chain);
    let initial = LatentVector::sample_uniform(target.latent_shape(), &mut rng);
    let evaluation = finite(target.evaluate(&initial)?)?;
    let mut state = ChainState::new(initial, evaluation);

    let mut map = snapshot(&state);
    let mut samples = Vec::new();
    let mut trace = Vec::with_capacity(settings.iterations + 1);
    let mut record = |state: &ChainState<T::Model>, map: &ChainSample<T::Model>, samples: &mut Vec<_>| {
        trace.push(TraceRow {
            iteration: state.iteration,
            log_posterior: state.log_posterior,
            best_log_posterior: map.log_posterior,
            acceptance_rate: state.acceptance_rate(),
            misfit_rms: state.misfit_rms,
        });
        if settings.retains(state.iteration) {
            samples.push(snapshot(state));
        }
    };
    record(&state, &map, &mut samples);

    for _ in 0..settings.iterations {
        let candidate = propose(&state.latent, settings.proposal_fraction, &mut rng);
        let u: f64 = rng.random();
        let evaluation = if candidate == state.latent {
            Evaluation { log_posterior: state.log_posterior, misfit_rms: state.misfit_rms, model: state.model.clone() }
        } else {
            finite(target.evaluate(&candidate)?)?
        };
        state.metropolis_step(candidate, evaluation, u);
        if state.log_posterior > map.log_posterior {
            map = snapshot(&state);
        }
        record(&state, &map, &mut samples);
    }

    Ok(ChainResult { chain, samples, trace, accepted: state.accepted, iterations: settings.iterations, map })
}

/// Runs `chains` independent chains in parallel; results are ordered by chain index.
pub fn run_chains<T: Target>(target: &T, settings: &ChainSettings, chains: usize) -> Result<Vec<ChainResult<T::Model>>> {
    if chains == 0 {
        return Err(Error::InvalidParameter("chain count must be >= 1".into()));
    }
    (0..chains).into_par_iter().map(|c| run_chain(target, settings, c)).collect()
}
