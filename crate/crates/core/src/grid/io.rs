//! Grid file formats.
//!
//! Raw formats carry no header, so dims always come from the caller.
//!
//! * `gslib` – ASCII: title line, number of variables (`1`), variable name,
//!   then one value per line in x-fastest order.
//! * `raw_f32` – 32-bit IEEE-754 little-endian per cell.
//! * `raw_u8` – one byte per cell.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Cell, FaciesGrid, Grid, GridDims, RealGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFormat {
    #[serde(alias = "gslib")]
    GslibAscii,
    RawF32,
    RawU8,
}

impl GridFormat {
    /// Conventional file extension.
    pub fn extension(self) -> &'static str {
        match self {
            GridFormat::GslibAscii => "gslib",
            GridFormat::RawF32 => "f32",
            GridFormat::RawU8 => "u8",
        }
    }
}

impl fmt::Display for GridFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridFormat::GslibAscii => "gslib_ascii",
            GridFormat::RawF32 => "raw_f32",
            GridFormat::RawU8 => "raw_u8",
        })
    }
}

impl FromStr for GridFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gslib" | "gslib_ascii" => Ok(GridFormat::GslibAscii),
            "raw_f32" | "f32" => Ok(GridFormat::RawF32),
            "raw_u8" | "u8" => Ok(GridFormat::RawU8),
            other => Err(Error::Format(format!("unknown grid format `{other}`"))),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_facies(path: impl AsRef<Path>, format: GridFormat, dims: GridDims) -> Result<FaciesGrid> {
    decode_facies(&read(path.as_ref())?, format, dims)
}

pub fn load_real(path: impl AsRef<Path>, format: GridFormat, dims: GridDims) -> Result<RealGrid> {
    decode_real(&read(path.as_ref())?, format, dims)
}

pub fn save_facies(grid: &FaciesGrid, path: impl AsRef<Path>, format: GridFormat) -> Result<()> {
    write(path.as_ref(), &encode_facies(grid, format))
}

pub fn save_real(grid: &RealGrid, path: impl AsRef<Path>, format: GridFormat) -> Result<()> {
    write(path.as_ref(), &encode_real(grid, format))
}

/// Serializes a facies grid. The output depends only on the grid and format.
pub fn encode_facies(grid: &FaciesGrid, format: GridFormat) -> Vec<u8> {
    match format {
        GridFormat::RawU8 => grid.values().to_vec(),
        GridFormat::RawF32 => grid.values().iter().flat_map(|&v| (v as f32).to_le_bytes()).collect(),
        GridFormat::GslibAscii => gslib(grid.dims(), "facies", grid.values().iter().map(|v| v.to_string())),
    }
}

/// Serializes a real grid. `raw_u8` truncates to `0..=255`; `raw_f32` narrows to f32.
pub fn encode_real(grid: &RealGrid, format: GridFormat) -> Vec<u8> {
    match format {
        GridFormat::RawU8 => grid.values().iter().map(|&v| v.clamp(0.0, 255.0) as u8).collect(),
        GridFormat::RawF32 => grid.values().iter().flat_map(|&v| (v as f32).to_le_bytes()).collect(),
        GridFormat::GslibAscii => gslib(grid.dims(), "value", grid.values().iter().map(|v| format!("{v:?}"))),
    }
}

fn gslib(dims: &GridDims, name: &str, values: impl Iterator<Item = String>) -> Vec<u8> {
    let mut out = format!("facinv {} {} {}\n1\n{name}\n", dims.nx, dims.ny, dims.nz);
    for v in values {
        out.push_str(&v);
        out.push('\n');
    }
    out.into_bytes()
}

pub fn decode_facies(bytes: &[u8], format: GridFormat, dims: GridDims) -> Result<FaciesGrid> {
    let values = match format {
        GridFormat::RawU8 => bytes.to_vec(),
        GridFormat::RawF32 => f32_cells(bytes, dims)?
            .into_iter()
            .enumerate()
            .map(|(index, v)| facies_code(v as f64, index))
            .collect::<Result<_>>()?,
        GridFormat::GslibAscii => {
            gslib_cells(bytes)?.into_iter().enumerate().map(|(index, v)| facies_code(v, index)).collect::<Result<_>>()?
        }
    };
    Grid::from_vec(dims, values)
}

pub fn decode_real(bytes: &[u8], format: GridFormat, dims: GridDims) -> Result<RealGrid> {
    let values = match format {
        GridFormat::RawU8 => bytes.iter().map(|&b| b as f64).collect(),
        GridFormat::RawF32 => f32_cells(bytes, dims)?.into_iter().map(f64::from).collect(),
        GridFormat::GslibAscii => gslib_cells(bytes)?,
    };
    Grid::from_vec(dims, values)
}

fn facies_code(v: f64, index: usize) -> Result<u8> {
    if v.fract() != 0.0 || !(0.0..=255.0).contains(&v) {
        return Err(Error::UnknownFacies { code: v as i64, index });
    }
    let code = v as u8;
    code.check(index)?;
    Ok(code)
}

fn f32_cells(bytes: &[u8], dims: GridDims) -> Result<Vec<f32>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::LengthMismatch { expected: dims.len(), actual: bytes.len() / 4 });
    }
    Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

fn gslib_cells(bytes: &[u8]) -> Result<Vec<f64>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Format(format!("gslib file is not UTF-8: {e}")))?;
    let mut lines = text.lines();
    lines.next().ok_or_else(|| Error::Format("gslib file is empty".into()))?;
    let nvar: usize = lines
        .next()
        .and_then(|l| l.split_whitespace().next())
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Format("gslib variable count missing".into()))?;
    if nvar != 1 {
        return Err(Error::Format(format!("expected one gslib variable, found {nvar}")));
    }
    lines.next().ok_or_else(|| Error::Format("gslib variable name missing".into()))?;
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(index, l)| {
            l.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad gslib value `{}` at cell {index}", l.trim())))
        })
        .collect()
}
