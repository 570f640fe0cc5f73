use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::likelihood::{gaussian_log_likelihood, log_likelihood_wells, misfit_rms, residual_sum_squares, LikelihoodSpec};
use super::posterior::{posterior_stats, PosteriorStats};
use super::sampler::{run_chains, ChainResult, ChainSettings, Evaluation, Target};
use crate::error::{Error, Result};
use crate::generator::{binarize, load_generator, GeneratorNetwork, LatentShape, LatentVector};
use crate::grid::{load_real, FaciesGrid, GridDims, GridFormat, RealGrid, WellSet};
use crate::seismic::{default_half_length, ricker, FaciesPropertyTable, ForwardModel, SeismicCube};

/// Origin placing a survey-sized window at the center of the generator output.
pub fn centered_crop(output: [usize; 3], survey: [usize; 3]) -> Result<[usize; 3]> {
    let mut origin = [0; 3];
    for a in 0..3 {
        if survey[a] > output[a] {
            return Err(Error::Shape(format!("survey {survey:?} does not fit generator output {output:?}")));
        }
        origin[a] = (output[a] - survey[a]) / 2;
    }
    Ok(origin)
}

/// Seismic facies inversion over a generator's latent space.
///
/// Each latent vector is generated, binarized, cropped to the survey window
/// and forward modeled; the log-posterior is the Gaussian seismic term plus
/// the well penalty. The latent prior is uniform on `[-1, 1]` and contributes
/// a constant.
#[derive(Debug, Clone)]
pub struct InversionProblem {
    pub generator: Arc<GeneratorNetwork>,
    pub crop_origin: [usize; 3],
    pub forward: ForwardModel,
    pub observed: SeismicCube,
    pub wells: WellSet,
    pub likelihood: LikelihoodSpec,
    pub settings: ChainSettings,
    pub chains: usize,
}

/// Chains plus pooled posterior statistics.
#[derive(Debug, Clone)]
pub struct InversionOutcome {
    pub chains: Vec<ChainResult<FaciesGrid>>,
    pub posterior: PosteriorStats,
}

impl InversionProblem {
    pub fn validate(&self) -> Result<()> {
        self.likelihood.validate()?;
        self.settings.validate()?;
        self.forward.table.validate()?;
        if self.chains == 0 {
            return Err(Error::InvalidParameter("chain count must be >= 1".into()));
        }
        let out = self.generator.output_shape()?;
        let survey = self.observed.dims().shape();
        for a in 0..3 {
            if self.crop_origin[a] + survey[a] > out[a] {
                return Err(Error::Shape(format!(
                    "crop at {:?} of size {survey:?} exceeds generator output {out:?}",
                    self.crop_origin
                )));
            }
        }
        if self.forward.wavelet.len() > 2 * survey[2] + 1 {
            return Err(Error::InvalidParameter(format!(
                "wavelet of {} samples is longer than 2 * nz + 1 = {}",
                self.forward.wavelet.len(),
                2 * survey[2] + 1
            )));
        }
        self.wells.check_within(self.observed.dims())
    }

    /// Facies model of `latent` on the survey grid.
    pub fn facies_model(&self, latent: &LatentVector) -> Result<FaciesGrid> {
        let continuous = self.generator.generate(latent)?;
        let facies = binarize(&continuous, self.generator.output_threshold);
        facies.extract_patch(self.crop_origin, self.observed.dims().shape())
    }

    pub fn run(&self) -> Result<InversionOutcome> {
        self.validate()?;
        let chains = run_chains(self, &self.settings, self.chains)?;
        let posterior = posterior_stats(&chains)?;
        Ok(InversionOutcome { chains, posterior })
    }
}

impl Target for InversionProblem {
    type Model = FaciesGrid;

    fn latent_shape(&self) -> LatentShape {
        self.generator.input_shape
    }

    fn evaluate(&self, latent: &LatentVector) -> Result<Evaluation<FaciesGrid>> {
        let model = self.facies_model(latent)?;
        let synthetic = self.forward.seismic(&model)?;
        let sse = residual_sum_squares(&self.observed, &synthetic)?;
        let seismic = gaussian_log_likelihood(sse, self.observed.len(), self.likelihood.sigma);
        let wells = log_likelihood_wells(&model, &self.wells, self.likelihood.well_weight)?;
        Ok(Evaluation { log_posterior: seismic + wells, misfit_rms: (sse / self.observed.len() as f64).sqrt(), model })
    }
}

/// Gaussian likelihood directly on the continuous generator output, without
/// binarization or forward modeling.
#[derive(Debug, Clone)]
pub struct ContinuousTarget {
    pub generator: Arc<GeneratorNetwork>,
    pub observed: RealGrid,
    pub sigma: f64,
}

impl Target for ContinuousTarget {
    type Model = RealGrid;

    fn latent_shape(&self) -> LatentShape {
        self.generator.input_shape
    }

    fn evaluate(&self, latent: &LatentVector) -> Result<Evaluation<RealGrid>> {
        let model = self.generator.generate(latent)?;
        let sse = residual_sum_squares(&self.observed, &model)?;
        Ok(Evaluation {
            log_posterior: gaussian_log_likelihood(sse, model.len(), self.sigma),
            misfit_rms: misfit_rms(&self.observed, &model)?,
            model,
        })
    }
}

fn default_cell_size() -> [f64; 3] {
    [50.0, 50.0, 1.0]
}

/// JSON problem definition. Relative paths are resolved against the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionConfig {
    pub weights: PathBuf,
    pub observed: PathBuf,
    #[serde(default = "default_real_format")]
    pub observed_format: GridFormat,
    /// Survey extent `[nx, ny, nz]`.
    pub dims: [usize; 3],
    #[serde(default = "default_cell_size")]
    pub cell_size: [f64; 3],
    #[serde(default)]
    pub wells: Option<PathBuf>,
    /// Defaults to a centered window.
    #[serde(default)]
    pub crop_origin: Option<[usize; 3]>,
    #[serde(default = "defaults::sigma")]
    pub sigma: f64,
    #[serde(default = "defaults::well_weight")]
    pub well_weight: f64,
    #[serde(default = "defaults::proposal_fraction")]
    pub proposal_fraction: f64,
    #[serde(default = "defaults::iterations")]
    pub iterations: usize,
    #[serde(default = "defaults::chains")]
    pub chains: usize,
    #[serde(default = "defaults::burn_in")]
    pub burn_in: f64,
    #[serde(default = "defaults::thin")]
    pub thin: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::frequency")]
    pub frequency: f64,
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    /// Defaults to `ceil(3 / (f dt))`, capped at `nz`.
    #[serde(default)]
    pub half_length: Option<usize>,
    #[serde(default)]
    pub properties: Option<FaciesPropertyTable>,
    #[serde(default)]
    pub output_threshold: f64,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_real_format")]
    pub output_format: GridFormat,
}

fn default_real_format() -> GridFormat {
    GridFormat::RawF32
}

mod defaults {
    use std::path::PathBuf;

    pub fn sigma() -> f64 {
        0.01
    }
    pub fn well_weight() -> f64 {
        10.0
    }
    pub fn proposal_fraction() -> f64 {
        0.1
    }
    pub fn iterations() -> usize {
        30_000
    }
    pub fn chains() -> usize {
        12
    }
    pub fn burn_in() -> f64 {
        0.5
    }
    pub fn thin() -> usize {
        10
    }
    pub fn frequency() -> f64 {
        40.0
    }
    pub fn dt() -> f64 {
        1e-3
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("invert_out")
    }
}

impl InversionConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config and resolves its relative paths against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.weights);
        fix(&mut self.observed);
        fix(&mut self.output_dir);
        if let Some(w) = self.wells.as_mut() {
            fix(w);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn settings(&self) -> ChainSettings {
        ChainSettings {
            iterations: self.iterations,
            proposal_fraction: self.proposal_fraction,
            burn_in: self.burn_in,
            thin: self.thin,
            seed: self.seed,
        }
    }

    /// Loads every referenced file and assembles a validated problem.
    pub fn build(&self) -> Result<InversionProblem> {
        let mut generator = load_generator(&self.weights)?;
        generator.output_threshold = self.output_threshold;
        let [nx, ny, nz] = self.dims;
        let dims = GridDims::with_cell_size(nx, ny, nz, self.cell_size)?;
        let observed = load_real(&self.observed, self.observed_format, dims)?;
        let wells = match &self.wells {
            Some(p) => WellSet::load(p)?,
            None => WellSet::default(),
        };
        let half = self.half_length.unwrap_or_else(|| default_half_length(self.frequency, self.dt).min(nz));
        let forward = ForwardModel::new(self.properties.clone().unwrap_or_default(), ricker(self.frequency, self.dt, half)?)?;
        let crop_origin = match self.crop_origin {
            Some(o) => o,
            None => centered_crop(generator.output_shape()?, self.dims)?,
        };
        let problem = InversionProblem {
            generator: Arc::new(generator),
            crop_origin,
            forward,
            observed,
            wells,
            likelihood: LikelihoodSpec { sigma: self.sigma, well_weight: self.well_weight },
            settings: self.settings(),
            chains: self.chains,
        };
        problem.validate()?;
        Ok(problem)
    }
}
