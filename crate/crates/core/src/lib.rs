//! Seismic facies inversion with a generative geological prior.
//!
//! The crate is organised along the processing chain:
//!
//! * [`grid`] – dense 3-D categorical and real grids, file formats, well data.
//! * [`generator`] – transposed-convolution generator inference and the FACGEN weight format.
//! * [`seismic`] – facies to elastic properties, reflectivity, Ricker wavelet convolution.
//! * [`geostats`] – indicator variograms, connectivity functions and generator QA.
//! * [`inversion`] – parallel Metropolis chains over the generator's latent space.
//!
//! Grids are stored x-fastest: the flat index of cell `(i, j, k)` is
//! `i + nx * (j + ny * k)`.

pub mod error;
pub mod generator;
pub mod geostats;
pub mod grid;
pub mod inversion;
pub mod seismic;

pub use error::{Error, Result};
pub use generator::{Activation, GeneratorNetwork, LatentVector, TransposedConvLayer};
pub use grid::{FaciesGrid, GridDims, GridFormat, RealGrid, WellSet, CHANNEL, MUD};
pub use seismic::{ElasticModel, FaciesPropertyTable, SeismicCube, Wavelet};
