//! Generator quality assessment against training-image patches.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::connectivity::connectivity_from_labels;
use super::{ensemble_envelope, indicator_variogram, label_components, Axis, Envelope, Neighborhood, StatCurve, StatKind};
use crate::error::{Error, Result};
use crate::grid::{facies_proportions, FaciesGrid, FACIES_CATEGORIES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaConfig {
    /// Reference patch extent `[px, py, pz]`.
    pub patch_size: [usize; 3],
    pub patch_count: usize,
    /// Largest lag per axis `[x, y, z]`.
    pub max_lag: [usize; 3],
    pub variogram_threshold: f64,
    pub connectivity_threshold: f64,
    pub proportion_threshold: f64,
    pub seed: u64,
    pub neighborhood: Neighborhood,
}

impl Default for QaConfig {
    fn default() -> Self {
        QaConfig {
            patch_size: [100, 100, 50],
            patch_count: 100,
            max_lag: [20, 20, 20],
            variogram_threshold: 0.01,
            connectivity_threshold: 0.1,
            proportion_threshold: 0.02,
            seed: 0,
            neighborhood: Neighborhood::Six,
        }
    }
}

impl QaConfig {
    /// Reduces `max_lag` so it fits every given extent.
    pub fn clamp_lags(&mut self, shapes: impl IntoIterator<Item = [usize; 3]>) {
        for shape in shapes {
            for axis in 0..3 {
                self.max_lag[axis] = self.max_lag[axis].min(shape[axis].saturating_sub(1));
            }
        }
    }

    /// Seeded uniform patch origins inside a grid of `shape`.
    pub fn patch_origins(&self, shape: [usize; 3]) -> Result<Vec<[usize; 3]>> {
        if (0..3).any(|a| self.patch_size[a] == 0 || self.patch_size[a] > shape[a]) {
            return Err(Error::InvalidParameter(format!(
                "patch size {:?} does not fit training image {shape:?}",
                self.patch_size
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((0..self.patch_count)
            .map(|_| {
                let mut o = [0; 3];
                for a in 0..3 {
                    o[a] = rng.random_range(0..=shape[a] - self.patch_size[a]);
                }
                o
            })
            .collect())
    }
}

/// Comparison for one `(kind, facies, axis)` triple.
#[derive(Debug, Clone, PartialEq)]
pub struct QaEntry {
    pub kind: StatKind,
    pub facies: u8,
    pub axis: Axis,
    /// Largest `|realization mean - reference mean|` over lags where both exist.
    pub max_abs_deviation: f64,
    /// Fraction of realization curves lying inside the reference min/max band at every lag.
    pub band_fraction: f64,
    pub reference: Envelope,
    pub realizations: Envelope,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaReport {
    pub config: QaConfig,
    pub realization_count: usize,
    pub entries: Vec<QaEntry>,
    pub ti_proportions: BTreeMap<u8, f64>,
    /// Mean over realizations of each facies fraction.
    pub realization_proportions: BTreeMap<u8, f64>,
    pub proportion_deltas: BTreeMap<u8, f64>,
    pub pass: bool,
}

impl QaReport {
    pub fn max_deviation(&self, kind: StatKind) -> f64 {
        self.entries.iter().filter(|e| e.kind == kind).map(|e| e.max_abs_deviation).fold(0.0, f64::max)
    }

    pub fn max_proportion_delta(&self) -> f64 {
        self.proportion_deltas.values().copied().fold(0.0, f64::max)
    }

    pub fn entry(&self, kind: StatKind, facies: u8, axis: Axis) -> Option<&QaEntry> {
        self.entries.iter().find(|e| e.kind == kind && e.facies == facies && e.axis == axis)
    }

    /// `key = value` lines, ending with the pass flag.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "realizations = {}", self.realization_count);
        let _ = writeln!(out, "patch_size = {}x{}x{}", c.patch_size[0], c.patch_size[1], c.patch_size[2]);
        let _ = writeln!(out, "patch_count = {}", c.patch_count);
        let _ = writeln!(out, "max_lag = {},{},{}", c.max_lag[0], c.max_lag[1], c.max_lag[2]);
        let _ = writeln!(out, "seed = {}", c.seed);
        let _ = writeln!(out, "variogram_threshold = {:?}", c.variogram_threshold);
        let _ = writeln!(out, "connectivity_threshold = {:?}", c.connectivity_threshold);
        let _ = writeln!(out, "proportion_threshold = {:?}", c.proportion_threshold);
        for e in &self.entries {
            let key = format!("{}.facies{}.{}", e.kind, e.facies, e.axis);
            let _ = writeln!(out, "{key}.max_abs_deviation = {:.6}", e.max_abs_deviation);
            let _ = writeln!(out, "{key}.band_fraction = {:.4}", e.band_fraction);
        }
        for (code, p) in &self.ti_proportions {
            let _ = writeln!(out, "proportion.facies{code}.ti = {p:.6}");
        }
        for (code, p) in &self.realization_proportions {
            let _ = writeln!(out, "proportion.facies{code}.realizations = {p:.6}");
        }
        for (code, d) in &self.proportion_deltas {
            let _ = writeln!(out, "proportion.facies{code}.delta = {d:.6}");
        }
        let _ = writeln!(out, "variogram.max_abs_deviation = {:.6}", self.max_deviation(StatKind::Variogram));
        let _ = writeln!(out, "connectivity.max_abs_deviation = {:.6}", self.max_deviation(StatKind::Connectivity));
        let _ = writeln!(out, "pass = {}", self.pass);
        out
    }
}

/// Variogram then connectivity curves of one grid, each ordered by facies then axis.
pub fn grid_curves(grid: &FaciesGrid, max_lag: [usize; 3], neighborhood: Neighborhood) -> Result<Vec<StatCurve>> {
    let mut out = Vec::with_capacity(4 * FACIES_CATEGORIES as usize * 3);
    for facies in 0..FACIES_CATEGORIES {
        for axis in Axis::ALL {
            out.push(indicator_variogram(grid, facies, axis, max_lag[axis.index()])?);
        }
    }
    for facies in 0..FACIES_CATEGORIES {
        let labels = label_components(grid, facies, neighborhood);
        for axis in Axis::ALL {
            out.push(connectivity_from_labels(&labels, facies, axis, max_lag[axis.index()]));
        }
    }
    Ok(out)
}

fn band_fraction(curves: &[&StatCurve], band: &Envelope) -> f64 {
    const EPS: f64 = 1e-12;
    let inside = curves
        .iter()
        .filter(|c| {
            c.points.iter().enumerate().all(|(n, p)| match (p.1, band.min[n], band.max[n]) {
                (Some(v), Some(lo), Some(hi)) => v >= lo - EPS && v <= hi + EPS,
                _ => true,
            })
        })
        .count();
    inside as f64 / curves.len() as f64
}

/// Compares generator realizations with seeded random patches of the training image.
pub fn qa_report(realizations: &[FaciesGrid], ti: &FaciesGrid, config: &QaConfig) -> Result<QaReport> {
    if realizations.is_empty() {
        return Err(Error::Empty("quality assessment needs at least one realization".into()));
    }
    if config.patch_count == 0 {
        return Err(Error::InvalidParameter("patch count must be >= 1".into()));
    }
    for (name, t) in [
        ("variogram", config.variogram_threshold),
        ("connectivity", config.connectivity_threshold),
        ("proportion", config.proportion_threshold),
    ] {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("{name} threshold must be >= 0, got {t}")));
        }
    }
    for axis in Axis::ALL {
        let lag = config.max_lag[axis.index()];
        let smallest =
            realizations.iter().map(|g| axis.extent(g.dims())).chain([config.patch_size[axis.index()]]).min().unwrap_or(0);
        if lag >= smallest {
            return Err(Error::InvalidParameter(format!(
                "max lag {lag} along {axis} must be below the smallest extent {smallest}"
            )));
        }
    }
    let origins = config.patch_origins(ti.dims().shape())?;
    let patches = origins.iter().map(|&o| ti.extract_patch(o, config.patch_size)).collect::<Result<Vec<_>>>()?;

    let curves_of = |grids: &[FaciesGrid]| -> Result<Vec<Vec<StatCurve>>> {
        grids.par_iter().map(|g| grid_curves(g, config.max_lag, config.neighborhood)).collect()
    };
    let reference = curves_of(&patches)?;
    let generated = curves_of(realizations)?;

    let mut entries = Vec::new();
    for slot in 0..reference[0].len() {
        let ref_curves: Vec<StatCurve> = reference.iter().map(|c| c[slot].clone()).collect();
        let gen_curves: Vec<&StatCurve> = generated.iter().map(|c| &c[slot]).collect();
        let ref_env = ensemble_envelope(&ref_curves)?;
        let gen_env = ensemble_envelope(&gen_curves.iter().map(|c| (*c).clone()).collect::<Vec<_>>())?;
        let max_abs_deviation = ref_env
            .mean
            .iter()
            .zip(&gen_env.mean)
            .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).abs()))
            .fold(0.0, f64::max);
        entries.push(QaEntry {
            kind: ref_env.kind,
            facies: ref_env.facies,
            axis: ref_env.axis,
            max_abs_deviation,
            band_fraction: band_fraction(&gen_curves, &ref_env),
            reference: ref_env,
            realizations: gen_env,
        });
    }

    let ti_proportions = facies_proportions(ti);
    let mut realization_proportions: BTreeMap<u8, f64> = (0..FACIES_CATEGORIES).map(|c| (c, 0.0)).collect();
    for g in realizations {
        for (code, p) in facies_proportions(g) {
            *realization_proportions.entry(code).or_default() += p / realizations.len() as f64;
        }
    }
    let proportion_deltas: BTreeMap<u8, f64> = realization_proportions
        .iter()
        .map(|(&code, &p)| (code, (p - ti_proportions.get(&code).copied().unwrap_or(0.0)).abs()))
        .collect();

    let pass = entries.iter().all(|e| {
        let limit = match e.kind {
            StatKind::Variogram => config.variogram_threshold,
            StatKind::Connectivity => config.connectivity_threshold,
        };
        e.max_abs_deviation <= limit
    }) && proportion_deltas.values().all(|&d| d <= config.proportion_threshold);

    Ok(QaReport {
        config: config.clone(),
        realization_count: realizations.len(),
        entries,
        ti_proportions,
        realization_proportions,
        proportion_deltas,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDims;

    fn striped_ti() -> FaciesGrid {
        // channels elongated along y: stripes in x, varying with depth
        FaciesGrid::from_fn(GridDims::new(24, 30, 12).unwrap(), |i, _, k| (((i + k / 3) / 3) % 2) as u8).unwrap()
    }

    fn small_config() -> QaConfig {
        QaConfig { patch_size: [12, 12, 6], patch_count: 10, max_lag: [5, 5, 3], seed: 4, ..QaConfig::default() }
    }

    #[test]
    fn self_comparison_passes() {
        let ti = striped_ti();
        let config = small_config();
        let patches: Vec<_> = config
            .patch_origins(ti.dims().shape())
            .unwrap()
            .into_iter()
            .map(|o| ti.extract_patch(o, config.patch_size).unwrap())
            .collect();
        let report = qa_report(&patches, &ti, &config).unwrap();
        assert_eq!(report.entries.len(), 12);
        assert!(report.entries.iter().all(|e| e.max_abs_deviation < 1e-12));
        assert!(report.entries.iter().all(|e| e.band_fraction == 1.0));
        assert!(report.pass, "{}", report.to_text());
        assert!(report.to_text().ends_with("pass = true\n"));
    }

    #[test]
    fn uniform_realizations_fail() {
        let ti = striped_ti();
        let mud = FaciesGrid::filled(GridDims::new(12, 12, 6).unwrap(), 0).unwrap();
        let report = qa_report(&[mud], &ti, &small_config()).unwrap();
        assert!(!report.pass);
        assert!(report.max_deviation(StatKind::Variogram) > 0.1);
        assert!((report.proportion_deltas[&0] - (1.0 - report.ti_proportions[&0])).abs() < 1e-12);
    }

    #[test]
    fn degenerate_configs() {
        let ti = striped_ti();
        let g = ti.extract_patch([0, 0, 0], [12, 12, 6]).unwrap();
        assert!(qa_report(&[], &ti, &small_config()).is_err());
        let mut c = small_config();
        c.patch_size = [25, 12, 6];
        assert!(qa_report(std::slice::from_ref(&g), &ti, &c).is_err());
        let mut c = small_config();
        c.max_lag = [12, 5, 3];
        assert!(qa_report(std::slice::from_ref(&g), &ti, &c).is_err());
        let mut c = small_config();
        c.patch_count = 0;
        assert!(qa_report(&[g], &ti, &c).is_err());
    }

    #[test]
    fn clamp_lags_fits_extents() {
        let mut c = QaConfig::default();
        c.clamp_lags([[32, 32, 16], [100, 100, 50]]);
        assert_eq!(c.max_lag, [20, 20, 15]);
    }

    #[test]
    fn origins_are_seeded() {
        let c = small_config();
        assert_eq!(c.patch_origins([24, 30, 12]).unwrap(), c.patch_origins([24, 30, 12]).unwrap());
        assert!(c.patch_origins([24, 30, 12]).unwrap().iter().all(|o| o[0] <= 12 && o[1] <= 18 && o[2] <= 6));
    }
}
