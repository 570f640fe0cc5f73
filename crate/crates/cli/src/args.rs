use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Result;
use facinv_core::GridDims;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::usage;

/// Three non-negative integers written `a,b,c` or `axbxc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(transparent)]
pub struct Triple(pub [usize; 3]);

impl FromStr for Triple {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split([',', 'x']).map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected three values like 60,60,30, got `{s}`"));
        }
        let mut out = [0; 3];
        for (slot, p) in out.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| format!("`{p}` is not a non-negative integer"))?;
        }
        Ok(Triple(out))
    }
}

impl Triple {
    pub fn dims(self) -> Result<GridDims> {
        let [nx, ny, nz] = self.0;
        GridDims::new(nx, ny, nz).map_err(|e| usage(e.to_string()))
    }
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("missing required option --{flag}")))
}

pub fn existing(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!("input file {} does not exist", path.display())))
    }
}

/// Reads a JSON options file; relative paths are later resolved against its directory.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<(T, PathBuf)> {
    existing(path)?;
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let value = serde_json::from_str(&text).map_err(|e| usage(format!("malformed config {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((value, base))
}

pub fn rebase(path: Option<PathBuf>, base: &Path) -> Option<PathBuf> {
    path.map(|p| if p.is_relative() { base.join(p) } else { p })
}

/// Fills every `None` field of `$flags` from `$file`.
macro_rules! overlay {
    ($flags:expr, $file:expr; $($field:ident),* $(,)?) => {
        $(
            if $flags.$field.is_none() {
                $flags.$field = $file.$field.take();
            }
        )*
    };
}
pub(crate) use overlay;
