//! Post-stack convolutional forward modeling.
//!
//! facies -> velocity/density -> acoustic impedance -> normal-incidence
//! reflectivity -> trace-wise convolution with a Ricker wavelet. The vertical
//! (`z`) axis is the trace axis and one cell is one time sample.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FaciesGrid, GridDims, RealGrid, CHANNEL, MUD};

/// Seismic amplitudes, observed or synthetic; traces run along `z`.
pub type SeismicCube = RealGrid;

/// Vertical sample interval per cell, seconds.
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_FREQUENCY: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaciesProperties {
    /// `(min, max)` in m/s.
    pub velocity: (f64, f64),
    /// `(min, max)` in g/cm³.
    pub density: (f64, f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentMode {
    #[default]
    Midpoint,
    UniformSample,
}

/// Elastic property ranges per facies code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaciesPropertyTable {
    pub entries: BTreeMap<u8, FaciesProperties>,
    #[serde(default)]
    pub mode: AssignmentMode,
}

impl Default for FaciesPropertyTable {
    /// Channel sand 4800–5000 m/s, 2.6–2.8 g/cm³; mud 4000–4300 m/s, 1.9–2.4 g/cm³.
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(CHANNEL, FaciesProperties { velocity: (4800.0, 5000.0), density: (2.6, 2.8) });
        entries.insert(MUD, FaciesProperties { velocity: (4000.0, 4300.0), density: (1.9, 2.4) });
        FaciesPropertyTable { entries, mode: AssignmentMode::Midpoint }
    }
}

impl FaciesPropertyTable {
    pub fn validate(&self) -> Result<()> {
        for (code, p) in &self.entries {
            for (name, (lo, hi)) in [("velocity", p.velocity), ("density", p.density)] {
                if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "facies {code} {name} range ({lo}, {hi}) must satisfy 0 < min <= max"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticModel {
    pub velocity: RealGrid,
    pub density: RealGrid,
}

impl ElasticModel {
    pub fn impedance(&self) -> RealGrid {
        let values = self.velocity.values().iter().zip(self.density.values()).map(|(v, r)| v * r).collect();
        RealGrid::from_vec_unchecked(*self.velocity.dims(), values)
    }
}

/// Assigns velocity and density per cell from the facies table.
///
/// `UniformSample` draws each cell independently inside its facies range from
/// a generator seeded with `seed` (0 when absent).
pub fn facies_to_elastic(grid: &FaciesGrid, table: &FaciesPropertyTable, seed: Option<u64>) -> Result<ElasticModel> {
    table.validate()?;
    let mut lookup: [Option<FaciesProperties>; 256] = [None; 256];
    for (&code, &p) in &table.entries {
        lookup[code as usize] = Some(p);
    }
    let props = |code: u8| lookup[code as usize].ok_or(Error::MissingFacies(code));
    let n = grid.len();
    let mut velocity = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    match table.mode {
        AssignmentMode::Midpoint => {
            for &code in grid.values() {
                let p = props(code)?;
                velocity.push(0.5 * (p.velocity.0 + p.velocity.1));
                density.push(0.5 * (p.density.0 + p.density.1));
            }
        }
        AssignmentMode::UniformSample => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            let mut draw = |(lo, hi): (f64, f64)| if lo == hi { lo } else { rng.random_range(lo..=hi) };
            for &code in grid.values() {
                let p = props(code)?;
                velocity.push(draw(p.velocity));
                density.push(draw(p.density));
            }
        }
    }
    let dims = *grid.dims();
    Ok(ElasticModel {
        velocity: RealGrid::from_vec_unchecked(dims, velocity),
        density: RealGrid::from_vec_unchecked(dims, density),
    })
}

/// Sampled zero-phase Ricker wavelet, `2 * half_length + 1` samples centered on `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavelet {
    pub frequency: f64,
    pub dt: f64,
    samples: Vec<f64>,
}

impl Wavelet {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn half_length(&self) -> usize {
        self.samples.len() / 2
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample times in seconds.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.half_length() as f64;
        (0..self.samples.len()).map(move |n| (n as f64 - h) * self.dt)
    }

    /// Two-column CSV `t,w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,w\n");
        for (t, w) in self.times().zip(&self.samples) {
            out.push_str(&format!("{t:?},{w:?}\n"));
        }
        out
    }
}

/// `ceil(3 / (f * dt))` samples.
pub fn default_half_length(frequency: f64, dt: f64) -> usize {
    (3.0 / (frequency * dt)).ceil() as usize
}

pub fn ricker_value(frequency: f64, t: f64) -> f64 {
    let a = (PI * frequency * t).powi(2);
    (1.0 - 2.0 * a) * (-a).exp()
}

/// Ricker wavelet `(1 - 2π²f²t²) exp(-π²f²t²)` sampled at `t = n dt`,
/// `n = -half_length..=half_length`.
pub fn ricker(frequency: f64, dt: f64, half_length: usize) -> Result<Wavelet> {
    if !(frequency > 0.0 && frequency.is_finite()) || !(dt > 0.0 && dt.is_finite()) || half_length == 0 {
        return Err(Error::InvalidParameter(format!(
            "ricker needs f > 0, dt > 0, half_length >= 1 (got {frequency}, {dt}, {half_length})"
        )));
    }
    let h = half_length as isize;
    // evaluate |n| so both sides are bit-identical
    let samples = (-h..=h).map(|n| ricker_value(frequency, n.unsigned_abs() as f64 * dt)).collect();
    Ok(Wavelet { frequency, dt, samples })
}

/// Normal-incidence reflectivity `(Z[k+1] - Z[k]) / (Z[k+1] + Z[k])` per trace;
/// the bottom sample of each trace is 0.
pub fn reflectivity(elastic: &ElasticModel) -> Result<RealGrid> {
    let z = elastic.impedance();
    if let Some(index) = z.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(format!("non-positive impedance at cell {index}")));
    }
    Ok(reflectivity_of_impedance(&z))
}

pub(crate) fn reflectivity_of_impedance(z: &RealGrid) -> RealGrid {
    let dims = *z.dims();
    let plane = dims.nx * dims.ny;
    let zs = z.values();
    let mut r = vec![0.0; dims.len()];
    for k in 0..dims.nz.saturating_sub(1) {
        for p in 0..plane {
            let (a, b) = (zs[k * plane + p], zs[(k + 1) * plane + p]);
            r[k * plane + p] = (b - a) / (b + a);
        }
    }
    RealGrid::from_vec_unchecked(dims, r)
}

/// Convolves every vertical trace with `wavelet`, "same" alignment: output
/// sample `k` is `Σ_j r[j] w[h + k - j]`, so a spike at `j` places the wavelet
/// center at `j` and clips it at the trace ends.
pub fn synthesize(refl: &RealGrid, wavelet: &Wavelet) -> Result<SeismicCube> {
    let dims = *refl.dims();
    if wavelet.len() > 2 * dims.nz + 1 {
        return Err(Error::InvalidParameter(format!(
            "wavelet of {} samples is longer than 2 * nz + 1 = {}",
            wavelet.len(),
            2 * dims.nz + 1
        )));
    }
    let plane = dims.nx * dims.ny;
    let r = refl.values();
    let w = wavelet.samples();
    let h = wavelet.half_length();
    let nz = dims.nz;
    // each output depth slice only reads reflectivity; slices are independent
    let mut out = vec![0.0; dims.len()];
    out.par_chunks_mut(plane).enumerate().for_each(|(k, slice)| {
        let lo = k.saturating_sub(h);
        let hi = (k + h).min(nz - 1);
        for j in lo..=hi {
            let coeff = w[h + k - j];
            let src = &r[j * plane..(j + 1) * plane];
            for (o, s) in slice.iter_mut().zip(src) {
                *o += s * coeff;
            }
        }
    });
    Ok(RealGrid::from_vec_unchecked(dims, out))
}

/// Facies to seismic with a fixed property table and wavelet.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    pub table: FaciesPropertyTable,
    pub wavelet: Wavelet,
    pub seed: Option<u64>,
}

impl ForwardModel {
    pub fn new(table: FaciesPropertyTable, wavelet: Wavelet) -> Result<Self> {
        table.validate()?;
        Ok(ForwardModel { table, wavelet, seed: None })
    }

    /// Default table with a 40 Hz Ricker wavelet at 1 ms, its half length
    /// capped so it fits traces of `nz` samples.
    pub fn standard(nz: usize) -> Result<Self> {
        let half = default_half_length(DEFAULT_FREQUENCY, DEFAULT_DT).min(nz.max(1));
        ForwardModel::new(FaciesPropertyTable::default(), ricker(DEFAULT_FREQUENCY, DEFAULT_DT, half)?)
    }

    pub fn elastic(&self, grid: &FaciesGrid) -> Result<ElasticModel> {
        facies_to_elastic(grid, &self.table, self.seed)
    }

    pub fn seismic(&self, grid: &FaciesGrid) -> Result<SeismicCube> {
        let elastic = self.elastic(grid)?;
        synthesize(&reflectivity(&elastic)?, &self.wavelet)
    }
}

/// Flat one-trace grid helper used by tests and examples.
pub fn trace_grid(values: Vec<f64>) -> Result<RealGrid> {
    RealGrid::from_vec(GridDims::new(1, 1, values.len())?, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn facies_trace(codes: &[u8]) -> FaciesGrid {
        FaciesGrid::from_vec(GridDims::new(1, 1, codes.len()).unwrap(), codes.to_vec()).unwrap()
    }

    #[test]
    fn midpoint_properties() {
        let table = FaciesPropertyTable::default();
        let e = facies_to_elastic(&facies_trace(&[CHANNEL, MUD]), &table, None).unwrap();
        assert_abs_diff_eq!(e.velocity.values()[0], 4900.0);
        assert_abs_diff_eq!(e.density.values()[0], 2.7, epsilon = 1e-12);
        assert_abs_diff_eq!(e.velocity.values()[1], 4150.0);
        assert_abs_diff_eq!(e.density.values()[1], 2.15, epsilon = 1e-12);
    }

    #[test]
    fn uniform_sample_is_seeded_and_in_range() {
        let mut table = FaciesPropertyTable::default();
        table.mode = AssignmentMode::UniformSample;
        let g = facies_trace(&[0, 1, 1, 0, 1, 0, 0, 1]);
        let a = facies_to_elastic(&g, &table, Some(42)).unwrap();
        let b = facies_to_elastic(&g, &table, Some(42)).unwrap();
        let c = facies_to_elastic(&g, &table, Some(43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for (k, &code) in g.values().iter().enumerate() {
            let p = table.entries[&code];
            let v = a.velocity.values()[k];
            let r = a.density.values()[k];
            assert!(p.velocity.0 <= v && v <= p.velocity.1);
            assert!(p.density.0 <= r && r <= p.density.1);
        }
    }

    #[test]
    fn missing_entry() {
        let mut table = FaciesPropertyTable::default();
        table.entries.remove(&MUD);
        assert!(matches!(facies_to_elastic(&facies_trace(&[CHANNEL, MUD]), &table, None), Err(Error::MissingFacies(0))));
    }

    #[test]
    fn ricker_shape() {
        let w = ricker(40.0, 1e-3, 20).unwrap();
        assert_eq!(w.len(), 41);
        assert_eq!(w.samples()[20], 1.0);
        for n in 0..20 {
            assert_eq!(w.samples()[n], w.samples()[40 - n]);
        }
        assert!(w.samples().iter().all(|&v| v <= 1.0));
        assert!(ricker(0.0, 1e-3, 3).is_err());
        assert!(ricker(40.0, -1e-3, 3).is_err());
        assert!(ricker(40.0, 1e-3, 0).is_err());
    }

    #[test]
    fn ricker_zero_crossing() {
        let f = 40.0;
        let t0 = 1.0 / (2f64.sqrt() * PI * f);
        assert_abs_diff_eq!(t0, 5.627e-3, epsilon = 1e-6);
        assert_abs_diff_eq!(ricker_value(f, t0), 0.0, epsilon = 1e-12);
        assert!(ricker_value(f, t0 - 1e-5) > 0.0 && ricker_value(f, t0 + 1e-5) < 0.0);
    }

    #[test]
    fn ricker_is_zero_mean() {
        for (f, dt) in [(40.0, 1e-3), (25.0, 2e-3), (40.0, 1e-4)] {
            let w = ricker(f, dt, default_half_length(f, dt)).unwrap();
            let area: f64 = w.samples().iter().sum::<f64>() * dt;
            assert!(area.abs() < 1e-3, "f = {f}, dt = {dt}: {area}");
        }
    }

    #[test]
    fn wavelet_csv() {
        let w = ricker(40.0, 1e-3, 1).unwrap();
        let csv = w.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,w");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "0.0,1.0");
    }

    #[test]
    fn reflectivity_cases() {
        let table = FaciesPropertyTable::default();
        let flat = facies_to_elastic(&facies_trace(&[MUD; 5]), &table, None).unwrap();
        assert!(reflectivity(&flat).unwrap().values().iter().all(|&r| r == 0.0));

        let e = facies_to_elastic(&facies_trace(&[MUD, CHANNEL]), &table, None).unwrap();
        let r = reflectivity(&e).unwrap();
        assert_abs_diff_eq!(r.values()[0], (13230.0 - 8922.5) / (13230.0 + 8922.5), epsilon = 1e-12);
        assert_abs_diff_eq!(r.values()[0], 0.19445, epsilon = 1e-5);
        assert_eq!(r.values()[1], 0.0);

        let rev = facies_to_elastic(&facies_trace(&[CHANNEL, MUD]), &table, None).unwrap();
        assert_eq!(reflectivity(&rev).unwrap().values()[0], -r.values()[0]);
    }

    #[test]
    fn spike_reproduces_wavelet() {
        let w = ricker(40.0, 1e-3, 4).unwrap();
        let mut r = vec![0.0; 12];
        r[2] = 1.0;
        let s = synthesize(&trace_grid(r).unwrap(), &w).unwrap();
        for k in 0..12 {
            let expected = if k + 4 >= 2 && k <= 6 { w.samples()[4 + k - 2] } else { 0.0 };
            assert_eq!(s.values()[k], expected, "k = {k}");
        }
        let zero = synthesize(&trace_grid(vec![0.0; 12]).unwrap(), &w).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wavelet_length_limit() {
        let w = ricker(40.0, 1e-3, 6).unwrap();
        assert!(synthesize(&trace_grid(vec![0.0; 6]).unwrap(), &w).is_ok());
        assert!(synthesize(&trace_grid(vec![0.0; 5]).unwrap(), &w).is_err());
    }

    #[test]
    fn synthesize_traces_are_independent() {
        let dims = GridDims::new(3, 2, 10).unwrap();
        let r = RealGrid::from_fn(dims, |i, j, k| ((i * 7 + j * 3 + k) % 5) as f64 * 0.1 - 0.2).unwrap();
        let w = ricker(40.0, 1e-3, 5).unwrap();
        let s = synthesize(&r, &w).unwrap();
        for j in 0..2 {
            for i in 0..3 {
                let single = synthesize(&trace_grid(r.trace(i, j)).unwrap(), &w).unwrap();
                assert_eq!(single.values(), s.trace(i, j).as_slice());
            }
        }
    }

    proptest! {
        #[test]
        fn convolution_is_linear(a in proptest::collection::vec(-1.0f64..1.0, 16), b in proptest::collection::vec(-1.0f64..1.0, 16), c in -3.0f64..3.0) {
            let w = ricker(40.0, 1e-3, 8).unwrap();
            let sa = synthesize(&trace_grid(a.clone()).unwrap(), &w).unwrap();
            let sb = synthesize(&trace_grid(b.clone()).unwrap(), &w).unwrap();
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| c * x + y).collect();
            let sm = synthesize(&trace_grid(mix).unwrap(), &w).unwrap();
            for k in 0..16 {
                prop_assert!((sm.values()[k] - (c * sa.values()[k] + sb.values()[k])).abs() < 1e-12);
            }
            let doubled = synthesize(&trace_grid(a.iter().map(|x| 2.0 * x).collect()).unwrap(), &w).unwrap();
            for k in 0..16 {
                prop_assert!((doubled.values()[k] - 2.0 * sa.values()[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn convolution_is_shift_covariant(a in proptest::collection::vec(-1.0f64..1.0, 8), shift in 0usize..8) {
            let w = ricker(40.0, 1e-3, 3).unwrap();
            // zero padding on both sides keeps the clipped edges out of the comparison
            let mut base = vec![0.0; 24];
            base[8..16].copy_from_slice(&a);
            let mut moved = vec![0.0; 24];
            moved[8 + shift..16 + shift].copy_from_slice(&a);
            let s0 = synthesize(&trace_grid(base).unwrap(), &w).unwrap();
            let s1 = synthesize(&trace_grid(moved).unwrap(), &w).unwrap();
            for k in 5..(24 - 3 - shift) {
                prop_assert!((s1.values()[k + shift] - s0.values()[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn reflectivity_is_bounded(codes in proptest::collection::vec(0u8..2, 2..20), seed in any::<u64>()) {
            let mut table = FaciesPropertyTable::default();
            table.mode = AssignmentMode::UniformSample;
            let e = facies_to_elastic(&facies_trace(&codes), &table, Some(seed)).unwrap();
            prop_assert!(reflectivity(&e).unwrap().values().iter().all(|r| r.abs() < 1.0));
        }

        #[test]
        fn midpoint_is_piecewise_constant(codes in proptest::collection::vec(0u8..2, 1..30)) {
            let e = facies_to_elastic(&facies_trace(&codes), &FaciesPropertyTable::default(), None).unwrap();
            for a in 0..codes.len() {
                for b in 0..codes.len() {
                    if codes[a] == codes[b] {
                        prop_assert_eq!(e.velocity.values()[a], e.velocity.values()[b]);
                        prop_assert_eq!(e.density.values()[a], e.density.values()[b]);
                    }
                }
            }
        }
    }
}
