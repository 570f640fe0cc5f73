use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Cell, FaciesGrid, GridDims};
use crate::error::{Error, Result};

/// One well column with its facies log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Well {
    pub name: String,
    pub i: usize,
    pub j: usize,
    /// `(k, facies code)` pairs, sorted by depth index.
    pub observations: Vec<(usize, u8)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WellObservation {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub facies: u8,
}

/// Facies observations along vertical well columns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellSet {
    pub wells: Vec<Well>,
}

impl WellSet {
    pub fn new(wells: Vec<Well>) -> Result<Self> {
        let mut set = WellSet { wells };
        for w in &mut set.wells {
            w.observations.sort_by_key(|&(k, _)| k);
            if w.observations.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::Format(format!("well `{}` has more than one observation at the same depth", w.name)));
            }
            for (index, &(_, code)) in w.observations.iter().enumerate() {
                code.check(index)?;
            }
        }
        Ok(set)
    }

    /// Samples every `k` of the given columns from `grid`.
    pub fn from_columns(grid: &FaciesGrid, columns: &[(usize, usize)]) -> Result<Self> {
        let dims = grid.dims();
        let wells = columns
            .iter()
            .enumerate()
            .map(|(n, &(i, j))| {
                if i >= dims.nx || j >= dims.ny {
                    return Err(Error::OutOfBounds(format!("well column ({i}, {j}) outside grid")));
                }
                Ok(Well {
                    name: format!("W{:02}", n + 1),
                    i,
                    j,
                    observations: (0..dims.nz).map(|k| (k, grid.get(i, j, k))).collect(),
                })
            })
            .collect::<Result<_>>()?;
        WellSet::new(wells)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total number of observed cells.
    pub fn len(&self) -> usize {
        self.wells.iter().map(|w| w.observations.len()).sum()
    }

    pub fn observations(&self) -> impl Iterator<Item = WellObservation> + '_ {
        self.wells
            .iter()
            .flat_map(|w| w.observations.iter().map(move |&(k, facies)| WellObservation { i: w.i, j: w.j, k, facies }))
    }

    /// Fails if any observation lies outside `dims`.
    pub fn check_within(&self, dims: &GridDims) -> Result<()> {
        for w in &self.wells {
            if w.i >= dims.nx || w.j >= dims.ny {
                return Err(Error::OutOfBounds(format!(
                    "well `{}` at ({}, {}) outside {}x{} grid",
                    w.name, w.i, w.j, dims.nx, dims.ny
                )));
            }
            if let Some(&(k, _)) = w.observations.iter().find(|(k, _)| *k >= dims.nz) {
                return Err(Error::OutOfBounds(format!("well `{}` observation at k = {k} below grid depth {}", w.name, dims.nz)));
            }
        }
        Ok(())
    }

    /// Parses the text format: one `name i j k facies` record per line,
    /// separated by commas or whitespace. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut wells: Vec<Well> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
            let bad = || Error::Format(format!("wells line {}: expected `name i j k facies`, got `{line}`", lineno + 1));
            if fields.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
            let (i, j, k) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
            let facies: u8 = fields[4].parse().map_err(|_| bad())?;
            match wells.iter_mut().find(|w| w.name == fields[0]) {
                Some(w) if w.i == i && w.j == j => w.observations.push((k, facies)),
                Some(w) => {
                    return Err(Error::Format(format!(
                        "wells line {}: well `{}` moves from ({}, {}) to ({i}, {j})",
                        lineno + 1,
                        w.name,
                        w.i,
                        w.j
                    )))
                }
                None => wells.push(Well { name: fields[0].to_string(), i, j, observations: vec![(k, facies)] }),
            }
        }
        WellSet::new(wells)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# name i j k facies\n");
        for o in self.wells.iter().flat_map(|w| w.observations.iter().map(move |&(k, f)| (w, k, f))) {
            let (w, k, f) = o;
            out.push_str(&format!("{} {} {} {k} {f}\n", w.name, w.i, w.j));
        }
        out
    }
}
