//! Dense 3-D grids.
//!
//! Cells are stored x-fastest. [`FaciesGrid`] holds categorical codes
//! (`0` mud, `1` channel), [`RealGrid`] holds finite reals such as generator
//! output, impedance or seismic amplitudes.

mod io;
mod wells;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    decode_facies, decode_real, encode_facies, encode_real, load_facies, load_real, save_facies, save_real, GridFormat,
};
pub use wells::{Well, WellObservation, WellSet};

pub const MUD: u8 = 0;
pub const CHANNEL: u8 = 1;

/// Number of facies categories accepted when validating categorical grids.
pub const FACIES_CATEGORIES: u8 = 2;

/// Grid extent in cells plus the physical cell size in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    #[serde(default = "unit_cell")]
    pub cell_size: [f64; 3],
}

fn unit_cell() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

impl GridDims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        Self::with_cell_size(nx, ny, nz, unit_cell())
    }

    pub fn with_cell_size(nx: usize, ny: usize, nz: usize, cell_size: [f64; 3]) -> Result<Self> {
        let dims = GridDims { nx, ny, nz, cell_size };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::InvalidDims(format!("cell counts must be >= 1, got {}x{}x{}", self.nx, self.ny, self.nz)));
        }
        if !self.cell_size.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::InvalidDims(format!("cell sizes must be > 0, got {:?}", self.cell_size)));
        }
        Ok(())
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny && k < self.nz);
        i + self.nx * (j + self.ny * k)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let i = index % self.nx;
        let rest = index / self.nx;
        (i, rest % self.ny, rest / self.ny)
    }

    pub fn contains(&self, i: usize, j: usize, k: usize) -> bool {
        i < self.nx && j < self.ny && k < self.nz
    }

    /// Same cell counts, ignoring cell size.
    pub fn same_shape(&self, other: &GridDims) -> bool {
        self.shape() == other.shape()
    }
}

/// Cell types storable in a [`Grid`].
pub trait Cell: Copy + PartialEq + Send + Sync + std::fmt::Debug {
    fn check(self, index: usize) -> Result<()>;
}

impl Cell for u8 {
    fn check(self, index: usize) -> Result<()> {
        if self < FACIES_CATEGORIES {
            Ok(())
        } else {
            Err(Error::UnknownFacies { code: self as i64, index })
        }
    }
}

impl Cell for f64 {
    fn check(self, index: usize) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite { index })
        }
    }
}

/// Dense x-fastest 3-D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dims: GridDims,
    values: Vec<T>,
}

pub type FaciesGrid = Grid<u8>;
pub type RealGrid = Grid<f64>;

impl<T: Cell> Grid<T> {
    /// Builds a grid, validating the length and every cell.
    pub fn from_vec(dims: GridDims, values: Vec<T>) -> Result<Self> {
        dims.validate()?;
        if values.len() != dims.len() {
            return Err(Error::LengthMismatch { expected: dims.len(), actual: values.len() });
        }
        for (index, v) in values.iter().enumerate() {
            v.check(index)?;
        }
        Ok(Grid { dims, values })
    }

    pub fn filled(dims: GridDims, value: T) -> Result<Self> {
        Self::from_vec(dims, vec![value; dims.len()])
    }

    pub fn from_fn(dims: GridDims, mut f: impl FnMut(usize, usize, usize) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(dims.len());
        for k in 0..dims.nz {
            for j in 0..dims.ny {
                for i in 0..dims.nx {
                    values.push(f(i, j, k));
                }
            }
        }
        Self::from_vec(dims, values)
    }

    /// Construction path for values already known to be valid.
    pub(crate) fn from_vec_unchecked(dims: GridDims, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), dims.len());
        Grid { dims, values }
    }

    pub fn dims(&self) -> &GridDims {
        &self.dims
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.dims.index(i, j, k)]
    }

    /// One vertical column (trace) at `(i, j)`, top to bottom.
    pub fn trace(&self, i: usize, j: usize) -> Vec<T> {
        (0..self.dims.nz).map(|k| self.get(i, j, k)).collect()
    }

    /// Sub-volume starting at `origin` with `size` cells per axis.
    ///
    /// Cell `(a, b, c)` of the patch is cell `(i + a, j + b, k + c)` of `self`.
    /// The patch keeps the source cell size.
    pub fn extract_patch(&self, origin: [usize; 3], size: [usize; 3]) -> Result<Self> {
        let shape = self.dims.shape();
        for axis in 0..3 {
            if size[axis] == 0 {
                return Err(Error::OutOfBounds(format!("patch size {size:?} has a zero extent")));
            }
            if origin[axis] + size[axis] > shape[axis] {
                return Err(Error::OutOfBounds(format!("patch origin {origin:?} + size {size:?} exceeds dims {shape:?}")));
            }
        }
        let dims = GridDims { nx: size[0], ny: size[1], nz: size[2], cell_size: self.dims.cell_size };
        let mut values = Vec::with_capacity(dims.len());
        for c in 0..size[2] {
            for b in 0..size[1] {
                let start = self.dims.index(origin[0], origin[1] + b, origin[2] + c);
                values.extend_from_slice(&self.values[start..start + size[0]]);
            }
        }
        Ok(Grid::from_vec_unchecked(dims, values))
    }
}

impl FaciesGrid {
    /// Indicator of `facies` as 0/1 reals.
    pub fn indicator(&self, facies: u8) -> Vec<f64> {
        self.values.iter().map(|&v| if v == facies { 1.0 } else { 0.0 }).collect()
    }

    /// Fraction of cells per facies code; only codes that occur are listed.
    pub fn proportions(&self) -> BTreeMap<u8, f64> {
        facies_proportions(self)
    }
}

/// Fraction of cells carrying each facies code present in the grid.
pub fn facies_proportions(grid: &FaciesGrid) -> BTreeMap<u8, f64> {
    let mut counts = [0usize; 256];
    for &v in grid.values() {
        counts[v as usize] += 1;
    }
    let total = grid.len() as f64;
    counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(code, &c)| (code as u8, c as f64 / total)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dims(nx: usize, ny: usize, nz: usize) -> GridDims {
        GridDims::new(nx, ny, nz).unwrap()
    }

    #[test]
    fn rejects_degenerate_dims() {
        assert!(GridDims::new(0, 1, 1).is_err());
        assert!(GridDims::with_cell_size(1, 1, 1, [50.0, 50.0, 0.0]).is_err());
        assert!(GridDims::with_cell_size(60, 60, 30, [50.0, 50.0, 1.0]).is_ok());
    }

    #[test]
    fn index_is_x_fastest() {
        let d = dims(3, 4, 5);
        assert_eq!(d.index(1, 0, 0), 1);
        assert_eq!(d.index(0, 1, 0), 3);
        assert_eq!(d.index(0, 0, 1), 12);
        assert_eq!(d.coords(d.index(2, 3, 4)), (2, 3, 4));
    }

    #[test]
    fn validates_cells() {
        assert!(matches!(FaciesGrid::from_vec(dims(2, 1, 1), vec![0, 2]), Err(Error::UnknownFacies { code: 2, index: 1 })));
        assert!(matches!(RealGrid::from_vec(dims(2, 1, 1), vec![0.0, f64::NAN]), Err(Error::NonFinite { index: 1 })));
        assert!(matches!(RealGrid::from_vec(dims(2, 1, 1), vec![0.0]), Err(Error::LengthMismatch { expected: 2, actual: 1 })));
    }

    #[test]
    fn proportions_of_small_grids() {
        let mud = FaciesGrid::filled(dims(2, 2, 2), MUD).unwrap();
        let p = facies_proportions(&mud);
        assert_eq!(p.len(), 1);
        assert_eq!(p[&MUD], 1.0);

        let g = FaciesGrid::from_vec(dims(2, 2, 2), vec![1, 0, 0, 1, 0, 0, 1, 0]).unwrap();
        let p = facies_proportions(&g);
        assert_eq!(p[&CHANNEL], 0.375);
        assert_eq!(p[&MUD], 0.625);
    }

    #[test]
    fn whole_grid_patch_is_identity() {
        let g = RealGrid::from_fn(dims(3, 2, 2), |i, j, k| (i + 10 * j + 100 * k) as f64).unwrap();
        assert_eq!(g.extract_patch([0, 0, 0], [3, 2, 2]).unwrap(), g);
    }

    #[test]
    fn patch_out_of_bounds() {
        let g = FaciesGrid::filled(dims(120, 2, 2), MUD).unwrap();
        assert!(matches!(g.extract_patch([119, 0, 0], [2, 1, 1]), Err(Error::OutOfBounds(_))));
        assert!(g.extract_patch([119, 0, 0], [1, 1, 1]).is_ok());
    }

    fn arb_grid() -> impl Strategy<Value = FaciesGrid> {
        (1usize..7, 1usize..7, 1usize..7).prop_flat_map(|(nx, ny, nz)| {
            proptest::collection::vec(0u8..2, nx * ny * nz).prop_map(move |v| FaciesGrid::from_vec(dims(nx, ny, nz), v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn proportions_sum_to_one(g in arb_grid()) {
            let total: f64 = facies_proportions(&g).values().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn patch_cells_match_source(g in arb_grid(), seed in any::<u64>()) {
            let s = g.dims().shape();
            let o = [seed as usize % s[0], (seed >> 8) as usize % s[1], (seed >> 16) as usize % s[2]];
            let size = [s[0] - o[0], s[1] - o[1], s[2] - o[2]];
            let p = g.extract_patch(o, size).unwrap();
            for c in 0..size[2] { for b in 0..size[1] { for a in 0..size[0] {
                prop_assert_eq!(p.get(a, b, c), g.get(o[0] + a, o[1] + b, o[2] + c));
            }}}
        }

        #[test]
        fn nested_patches_compose(g in arb_grid(), seed in any::<u64>()) {
            let s = g.dims().shape();
            let o1 = [seed as usize % s[0], (seed >> 8) as usize % s[1], (seed >> 16) as usize % s[2]];
            let size1 = [s[0] - o1[0], s[1] - o1[1], s[2] - o1[2]];
            let o2 = [(seed >> 24) as usize % size1[0], (seed >> 32) as usize % size1[1], (seed >> 40) as usize % size1[2]];
            let size2 = [size1[0] - o2[0], size1[1] - o2[1], size1[2] - o2[2]];
            let twice = g.extract_patch(o1, size1).unwrap().extract_patch(o2, size2).unwrap();
            let once = g.extract_patch([o1[0] + o2[0], o1[1] + o2[1], o1[2] + o2[2]], size2).unwrap();
            prop_assert_eq!(twice, once);
        }
    }
}
