use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{check_lag, for_each_pair, Axis, StatCurve, StatKind};
use crate::error::Result;
use crate::grid::{FaciesGrid, GridDims};

/// Cell adjacency used for connected components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Neighborhood {
    /// Face neighbours.
    #[default]
    #[serde(rename = "6")]
    Six,
    /// Face, edge and corner neighbours.
    #[serde(rename = "26")]
    TwentySix,
}

impl Neighborhood {
    fn offsets(self) -> Vec<[isize; 3]> {
        let mut out = Vec::new();
        for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let manhattan = dx.abs() + dy.abs() + dz.abs();
                    let keep = match self {
                        Neighborhood::Six => manhattan == 1,
                        Neighborhood::TwentySix => manhattan > 0,
                    };
                    if keep {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

impl std::str::FromStr for Neighborhood {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "6" => Ok(Neighborhood::Six),
            "26" => Ok(Neighborhood::TwentySix),
            other => Err(crate::Error::InvalidParameter(format!("connectivity must be 6 or 26, got `{other}`"))),
        }
    }
}

/// Connected-component labels of one facies: `0` for other facies, `1..=count`
/// for components, numbered in scan order of their first cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentLabels {
    pub dims: GridDims,
    pub labels: Vec<u32>,
    pub count: usize,
}

impl ComponentLabels {
    /// Cell count per component, indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            if l > 0 {
                sizes[l as usize - 1] += 1;
            }
        }
        sizes
    }
}

/// Breadth-first flood fill over cells equal to `facies`.
pub fn label_components(grid: &FaciesGrid, facies: u8, neighborhood: Neighborhood) -> ComponentLabels {
    let dims = *grid.dims();
    let (nx, ny, nz) = (dims.nx as isize, dims.ny as isize, dims.nz as isize);
    let offsets = neighborhood.offsets();
    let values = grid.values();
    let mut labels = vec![0u32; values.len()];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for seed in 0..values.len() {
        if values[seed] != facies || labels[seed] != 0 {
            continue;
        }
        count += 1;
        labels[seed] = count;
        queue.push_back(seed);
        while let Some(cell) = queue.pop_front() {
            let (i, j, k) = dims.coords(cell);
            for d in &offsets {
                let (x, y, z) = (i as isize + d[0], j as isize + d[1], k as isize + d[2]);
                if x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz {
                    continue;
                }
                let n = (x + nx * (y + ny * z)) as usize;
                if values[n] == facies && labels[n] == 0 {
                    labels[n] = count;
                    queue.push_back(n);
                }
            }
        }
    }
    ComponentLabels { dims, labels, count: count as usize }
}

/// Connectivity function: among pairs at lag `h` along `axis` whose cells are
/// both `facies`, the fraction lying in the same connected component.
/// Lags without such a pair are gaps.
pub fn connectivity_function(
    grid: &FaciesGrid,
    facies: u8,
    axis: Axis,
    max_lag: usize,
    neighborhood: Neighborhood,
) -> Result<StatCurve> {
    check_lag(grid.dims(), axis, max_lag)?;
    let labels = label_components(grid, facies, neighborhood);
    Ok(connectivity_from_labels(&labels, facies, axis, max_lag))
}

pub(crate) fn connectivity_from_labels(labels: &ComponentLabels, facies: u8, axis: Axis, max_lag: usize) -> StatCurve {
    let l = &labels.labels;
    let points = (0..=max_lag)
        .map(|h| {
            let mut both = 0usize;
            let mut connected = 0usize;
            for_each_pair(&labels.dims, axis, h, |a, b| {
                if l[a] != 0 && l[b] != 0 {
                    both += 1;
                    connected += (l[a] == l[b]) as usize;
                }
            });
            (h, (both > 0).then(|| connected as f64 / both as f64))
        })
        .collect();
    StatCurve { facies, axis, kind: StatKind::Connectivity, points }
}
