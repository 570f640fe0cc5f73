//! All-or-nothing output writing and CSV plot data.
//!
//! Files are first written into a hidden temporary directory next to the
//! destination and only renamed into place by [`Staging::commit`]. Dropping
//! a staging area without committing leaves the destination untouched.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use facinv_core::geostats::{Envelope, StatCurve};
use facinv_core::inversion::ChainResult;
use tempfile::TempDir;

pub struct Staging {
    dest: PathBuf,
    tmp: TempDir,
    names: BTreeSet<String>,
}

impl Staging {
    pub fn new(dest: impl Into<PathBuf>) -> Result<Self> {
        let dest = dest.into();
        let anchor = existing_ancestor(&dest);
        let tmp = tempfile::Builder::new()
            .prefix(".facinv-staging-")
            .tempdir_in(&anchor)
            .with_context(|| format!("cannot create a staging directory in {}", anchor.display()))?;
        Ok(Staging { dest, tmp, names: BTreeSet::new() })
    }

    pub fn dest(&self) -> &Path {
        &self.dest
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if name.contains(['/', '\\']) || !self.names.insert(name.to_string()) {
            bail!("invalid or duplicate output name `{name}`");
        }
        let path = self.tmp.path().join(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))
    }

    /// Moves every staged file into the destination directory. On failure the
    /// files already moved are removed again.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dest).with_context(|| format!("cannot create {}", self.dest.display()))?;
        let mut moved = Vec::with_capacity(self.names.len());
        for name in &self.names {
            let target = self.dest.join(name);
            if let Err(e) = fs::rename(self.tmp.path().join(name), &target) {
                for done in &moved {
                    let _ = fs::remove_file(done);
                }
                return Err(e).with_context(|| format!("cannot move output to {}", target.display()));
            }
            moved.push(target);
        }
        Ok(moved)
    }
}

fn existing_ancestor(path: &Path) -> PathBuf {
    let absolute = std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf());
    let mut cur = absolute.as_path();
    loop {
        if cur.is_dir() {
            return cur.to_path_buf();
        }
        match cur.parent() {
            Some(p) => cur = p,
            None => return PathBuf::from("."),
        }
    }
}

/// One plot-ready table.
pub enum PlotData<'a> {
    /// `lag,value`
    Curve(&'a StatCurve),
    /// `lag,mean,min,max`
    Envelope(&'a Envelope),
    /// `iteration,log_posterior,best_log_posterior,acceptance_rate,misfit_sd`
    Trace(&'a ChainResult<facinv_core::FaciesGrid>),
}

impl PlotData<'_> {
    pub fn to_csv(&self) -> String {
        match self {
            PlotData::Curve(c) => c.to_csv(),
            PlotData::Envelope(e) => e.to_csv(),
            PlotData::Trace(t) => t.trace_csv(),
        }
    }
}

/// Stages one CSV per item, in the given order. An empty list is an error.
pub fn emit_plot_data(items: &[(String, PlotData<'_>)], staging: &mut Staging) -> Result<()> {
    if items.is_empty() {
        bail!("no curves, envelopes or traces to write");
    }
    for (name, data) in items {
        staging.write(name, data.to_csv().as_bytes())?;
    }
    Ok(())
}
