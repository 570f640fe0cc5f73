//! Spatial statistics used to compare generator output with a training image.
//!
//! Curves are computed along one grid axis at integer lags (in cells):
//! the indicator variogram `γ(h)` and the connectivity function `τ(h)`.

mod connectivity;
mod qa;
mod variogram;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDims;

pub use connectivity::{connectivity_function, label_components, ComponentLabels, Neighborhood};
pub use qa::{grid_curves, qa_report, QaConfig, QaEntry, QaReport};
pub use variogram::indicator_variogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn extent(self, dims: &GridDims) -> usize {
        dims.shape()[self.index()]
    }

    /// Flat-index step between neighbours along this axis.
    pub fn stride(self, dims: &GridDims) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => dims.nx,
            Axis::Z => dims.nx * dims.ny,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidParameter(format!("unknown axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    Variogram,
    Connectivity,
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatKind::Variogram => "variogram",
            StatKind::Connectivity => "connectivity",
        })
    }
}

/// One statistic for one facies along one axis. `None` marks a lag with no
/// qualifying pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StatCurve {
    pub facies: u8,
    pub axis: Axis,
    pub kind: StatKind,
    pub points: Vec<(usize, Option<f64>)>,
}

impl StatCurve {
    pub fn lags(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn value(&self, lag: usize) -> Option<f64> {
        self.points.iter().find(|p| p.0 == lag).and_then(|p| p.1)
    }

    /// `lag,value`; gaps are written as empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,value\n");
        for (lag, v) in &self.points {
            out.push_str(&format!("{lag},{}\n", fmt_opt(*v)));
        }
        out
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Per-lag mean, min and max over an ensemble of curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub facies: u8,
    pub axis: Axis,
    pub kind: StatKind,
    pub lags: Vec<usize>,
    pub mean: Vec<Option<f64>>,
    pub min: Vec<Option<f64>>,
    pub max: Vec<Option<f64>>,
}

impl Envelope {
    /// `lag,mean,min,max`; gaps are written as empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,mean,min,max\n");
        for n in 0..self.lags.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.lags[n],
                fmt_opt(self.mean[n]),
                fmt_opt(self.min[n]),
                fmt_opt(self.max[n])
            ));
        }
        out
    }
}

/// Per-lag statistics over curves sharing kind, facies, axis and lags.
/// Gaps are skipped; a lag with no defined value stays a gap.
pub fn ensemble_envelope(curves: &[StatCurve]) -> Result<Envelope> {
    let first = curves.first().ok_or_else(|| Error::Empty("envelope of zero curves".into()))?;
    let lags: Vec<usize> = first.lags().collect();
    for c in &curves[1..] {
        if c.kind != first.kind || c.facies != first.facies || c.axis != first.axis {
            return Err(Error::Shape(format!(
                "cannot mix {} facies {} axis {} with {} facies {} axis {}",
                first.kind, first.facies, first.axis, c.kind, c.facies, c.axis
            )));
        }
        if !c.lags().eq(lags.iter().copied()) {
            return Err(Error::Shape("curves have different lag grids".into()));
        }
    }
    let mut mean = Vec::with_capacity(lags.len());
    let mut min = Vec::with_capacity(lags.len());
    let mut max = Vec::with_capacity(lags.len());
    for n in 0..lags.len() {
        let vals: Vec<f64> = curves.iter().filter_map(|c| c.points[n].1).collect();
        if vals.is_empty() {
            mean.push(None);
            min.push(None);
            max.push(None);
        } else {
            mean.push(Some(vals.iter().sum::<f64>() / vals.len() as f64));
            min.push(vals.iter().copied().reduce(f64::min));
            max.push(vals.iter().copied().reduce(f64::max));
        }
    }
    Ok(Envelope { facies: first.facies, axis: first.axis, kind: first.kind, lags, mean, min, max })
}

pub(crate) fn check_lag(dims: &GridDims, axis: Axis, max_lag: usize) -> Result<()> {
    let extent = axis.extent(dims);
    if max_lag >= extent {
        return Err(Error::InvalidParameter(format!("max lag {max_lag} must be below the {axis} extent {extent}")));
    }
    Ok(())
}

/// Calls `f(a, b)` for every flat-index pair `(u, u + h)` along `axis`.
#[inline]
pub(crate) fn for_each_pair(dims: &GridDims, axis: Axis, h: usize, mut f: impl FnMut(usize, usize)) {
    let step = h * axis.stride(dims);
    let (nx, ny, nz) = (dims.nx, dims.ny, dims.nz);
    match axis {
        Axis::X => {
            for row in 0..ny * nz {
                let base = row * nx;
                for a in base..base + nx - h {
                    f(a, a + step);
                }
            }
        }
        Axis::Y => {
            for k in 0..nz {
                let base = k * nx * ny;
                for a in base..base + nx * (ny - h) {
                    f(a, a + step);
                }
            }
        }
        Axis::Z => {
            for a in 0..nx * ny * (nz - h) {
                f(a, a + step);
            }
        }
    }
}
