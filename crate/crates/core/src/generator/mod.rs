//! Generator inference: latent vector in, continuous 3-D grid out.
//!
//! A [`GeneratorNetwork`] is a chain of 3-D transposed convolutions, each
//! followed by an activation. Shapes inside the network use PyTorch order for
//! kernels, strides and paddings (depth `z`, height `y`, width `x`), while
//! grid and latent extents are given as `[nx, ny, nz]`.

mod conv;
mod facgen;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{FaciesGrid, GridDims, RealGrid, CHANNEL, MUD};

pub use conv::{conv_transpose3d, transposed_output_size, FeatureMaps};
pub use facgen::{decode_facgen, encode_facgen, load_generator, save_generator, FACGEN_MAGIC, FACGEN_VERSION};

/// Slope used for hidden layers when none is given.
pub const DEFAULT_LEAKY_SLOPE: f32 = 0.2;

#[inline]
pub fn leaky_relu(x: f64, alpha: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        alpha * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    None,
    LeakyRelu(f32),
    Tanh,
}

impl Activation {
    pub fn tag(self) -> u8 {
        match self {
            Activation::None => 0,
            Activation::LeakyRelu(_) => 1,
            Activation::Tanh => 2,
        }
    }
}

/// Input extent of a generator: `[lx, ly, lz, channels]`.
pub type LatentShape = [usize; 4];

/// Generator input, every entry in `[-1, 1]`.
///
/// Values are channel-major, each channel x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector {
    shape: LatentShape,
    values: Vec<f64>,
}

impl LatentVector {
    pub fn new(shape: LatentShape, values: Vec<f64>) -> Result<Self> {
        let expected = shape.iter().product::<usize>();
        if expected == 0 {
            return Err(Error::Shape(format!("latent shape {shape:?} is empty")));
        }
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(format!("latent entry {index} = {} outside [-1, 1]", values[index])));
        }
        Ok(LatentVector { shape, values })
    }

    /// Independent `U(-1, 1)` draw for every entry.
    pub fn sample_uniform<R: Rng + ?Sized>(shape: LatentShape, rng: &mut R) -> Self {
        let n = shape.iter().product();
        let values = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        LatentVector { shape, values }
    }

    pub fn shape(&self) -> LatentShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Replaces entry `index`; the value must lie in `[-1, 1]`.
    pub(crate) fn set(&mut self, index: usize, value: f64) {
        debug_assert!((-1.0..=1.0).contains(&value));
        self.values[index] = value;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransposedConvLayer {
    pub in_channels: usize,
    pub out_channels: usize,
    /// `[kd, kh, kw]`
    pub kernel: [usize; 3],
    /// `[sd, sh, sw]`
    pub stride: [usize; 3],
    /// `[pd, ph, pw]`
    pub padding: [usize; 3],
    /// `(in, out, kd, kh, kw)` nested, `kw` fastest.
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
    pub activation: Activation,
}

impl TransposedConvLayer {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: [usize; 3],
        stride: [usize; 3],
        padding: [usize; 3],
        weights: Vec<f32>,
        bias: Vec<f32>,
        activation: Activation,
    ) -> Result<Self> {
        let layer = TransposedConvLayer { in_channels, out_channels, kernel, stride, padding, weights, bias, activation };
        layer.validate()?;
        Ok(layer)
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::Shape("layer channel counts must be >= 1".into()));
        }
        if self.kernel.contains(&0) || self.stride.contains(&0) {
            return Err(Error::Shape(format!("kernel {:?} and stride {:?} must be >= 1", self.kernel, self.stride)));
        }
        let expected = self.in_channels * self.out_channels * self.kernel.iter().product::<usize>();
        if self.weights.len() != expected {
            return Err(Error::Shape(format!("layer weight block holds {} values, expected {expected}", self.weights.len())));
        }
        if self.bias.len() != self.out_channels {
            return Err(Error::Shape(format!("layer bias holds {} values, expected {}", self.bias.len(), self.out_channels)));
        }
        if let Activation::LeakyRelu(alpha) = self.activation {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::InvalidParameter(format!("leaky ReLU slope {alpha} outside (0, 1)")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn weight(&self, ci: usize, co: usize, a: usize, b: usize, c: usize) -> f32 {
        let [kd, kh, kw] = self.kernel;
        self.weights[(((ci * self.out_channels + co) * kd + a) * kh + b) * kw + c]
    }

    /// Output `[nx, ny, nz]` for an input of `[nx, ny, nz]`.
    pub fn output_shape(&self, input: [usize; 3]) -> Result<[usize; 3]> {
        let mut out = [0; 3];
        // x pairs with the width entries (index 2), z with depth (index 0)
        for (axis, slot) in out.iter_mut().enumerate() {
            let p = 2 - axis;
            *slot = transposed_output_size(input[axis], self.kernel[p], self.stride[p], self.padding[p]).ok_or_else(|| {
                Error::Shape(format!(
                    "non-positive output extent on axis {axis} for input {input:?}, kernel {:?}, stride {:?}, padding {:?}",
                    self.kernel, self.stride, self.padding
                ))
            })?;
        }
        Ok(out)
    }
}

/// Per-layer architecture description used to build networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec {
    pub out_channels: usize,
    pub kernel: [usize; 3],
    pub stride: [usize; 3],
    pub padding: [usize; 3],
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNetwork {
    pub input_shape: LatentShape,
    pub layers: Vec<TransposedConvLayer>,
    /// Binarization threshold applied to the final output.
    pub output_threshold: f64,
}

impl GeneratorNetwork {
    pub fn new(input_shape: LatentShape, layers: Vec<TransposedConvLayer>) -> Result<Self> {
        let net = GeneratorNetwork { input_shape, layers, output_threshold: 0.0 };
        net.validate()?;
        Ok(net)
    }

    /// Checks layer invariants, the channel chain and that every layer has a
    /// positive output extent.
    pub fn validate(&self) -> Result<()> {
        if self.input_shape.contains(&0) {
            return Err(Error::Shape(format!("latent shape {:?} is empty", self.input_shape)));
        }
        let Some(last) = self.layers.last() else {
            return Err(Error::Shape("generator has no layers".into()));
        };
        let mut channels = self.input_shape[3];
        for (n, layer) in self.layers.iter().enumerate() {
            layer.validate()?;
            if layer.in_channels != channels {
                return Err(Error::Shape(format!(
                    "layer {n} expects {} input channels but receives {channels}",
                    layer.in_channels
                )));
            }
            channels = layer.out_channels;
        }
        if last.out_channels != 1 {
            return Err(Error::Shape(format!("final layer must produce 1 channel, got {}", last.out_channels)));
        }
        self.output_shape().map(|_| ())
    }

    /// Spatial shape after each layer, starting with the latent shape.
    pub fn shape_chain(&self) -> Result<Vec<[usize; 3]>> {
        let mut shape = [self.input_shape[0], self.input_shape[1], self.input_shape[2]];
        let mut chain = vec![shape];
        for layer in &self.layers {
            shape = layer.output_shape(shape)?;
            chain.push(shape);
        }
        Ok(chain)
    }

    /// Output `[nx, ny, nz]`.
    pub fn output_shape(&self) -> Result<[usize; 3]> {
        Ok(*self.shape_chain()?.last().expect("chain starts with the latent shape"))
    }

    pub fn latent_len(&self) -> usize {
        self.input_shape.iter().product()
    }

    /// Builds a network with weights drawn from `N(0, gain² / fan_in)`-like
    /// uniform noise; useful for shape checks and benchmarks.
    pub fn random<R: Rng + ?Sized>(input_shape: LatentShape, specs: &[LayerSpec], rng: &mut R) -> Result<Self> {
        let mut channels = input_shape[3];
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            let kernel_len: usize = spec.kernel.iter().product();
            let scale = (3.0 / (channels * kernel_len) as f32).sqrt();
            let weights = (0..channels * spec.out_channels * kernel_len).map(|_| rng.random_range(-scale..scale)).collect();
            layers.push(TransposedConvLayer::new(
                channels,
                spec.out_channels,
                spec.kernel,
                spec.stride,
                spec.padding,
                weights,
                vec![0.0; spec.out_channels],
                spec.activation,
            )?);
            channels = spec.out_channels;
        }
        GeneratorNetwork::new(input_shape, layers)
    }

    /// Evaluates the network on `latent`.
    pub fn generate(&self, latent: &LatentVector) -> Result<RealGrid> {
        generate(self, latent)
    }
}

/// The five-layer schedule taking a `3³` latent to a `129³` output:
/// `5³` kernels, stride 2, paddings `1, 1, 1, 1, 0`.
pub fn default_architecture(hidden_channels: [usize; 4]) -> (LatentShape, Vec<LayerSpec>) {
    let paddings = [1, 1, 1, 1, 0];
    let outs = [hidden_channels[0], hidden_channels[1], hidden_channels[2], hidden_channels[3], 1];
    let specs = paddings
        .iter()
        .zip(outs)
        .enumerate()
        .map(|(n, (&p, out_channels))| LayerSpec {
            out_channels,
            kernel: [5; 3],
            stride: [2; 3],
            padding: [p; 3],
            activation: if n == 4 { Activation::Tanh } else { Activation::LeakyRelu(DEFAULT_LEAKY_SLOPE) },
        })
        .collect();
    ([3, 3, 3, 1], specs)
}

/// Maps a latent vector through every layer; the single output channel
/// becomes a grid with unit cell size.
pub fn generate(network: &GeneratorNetwork, latent: &LatentVector) -> Result<RealGrid> {
    if latent.shape() != network.input_shape {
        return Err(Error::Shape(format!(
            "latent shape {:?} does not match network input {:?}",
            latent.shape(),
            network.input_shape
        )));
    }
    let [lx, ly, lz, channels] = latent.shape();
    let mut maps = FeatureMaps::new(channels, [lx, ly, lz], latent.values().to_vec())?;
    for layer in &network.layers {
        maps = conv_transpose3d(&maps, layer)?;
    }
    let [nx, ny, nz] = maps.shape();
    RealGrid::from_vec(GridDims::new(nx, ny, nz)?, maps.into_data())
}

/// `value > threshold` becomes channel, everything else mud.
pub fn binarize(grid: &RealGrid, threshold: f64) -> FaciesGrid {
    let values = grid.values().iter().map(|&v| if v > threshold { CHANNEL } else { MUD }).collect();
    FaciesGrid::from_vec_unchecked(*grid.dims(), values)
}
