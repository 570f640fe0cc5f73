use rayon::prelude::*;

use super::{Activation, TransposedConvLayer};
use crate::error::{Error, Result};

/// A stack of same-shaped 3-D feature maps, channel-major, each map x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMaps {
    channels: usize,
    /// `[nx, ny, nz]`
    shape: [usize; 3],
    data: Vec<f64>,
}

impl FeatureMaps {
    pub fn new(channels: usize, shape: [usize; 3], data: Vec<f64>) -> Result<Self> {
        let expected = channels * shape.iter().product::<usize>();
        if channels == 0 || shape.contains(&0) {
            return Err(Error::Shape(format!("feature maps need >= 1 channel and non-empty shape, got {channels} x {shape:?}")));
        }
        if data.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: data.len() });
        }
        Ok(FeatureMaps { channels, shape, data })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.map_len();
        &self.data[c * n..(c + 1) * n]
    }

    fn map_len(&self) -> usize {
        self.shape.iter().product()
    }
}

/// Output extent of a transposed convolution along one axis.
pub fn transposed_output_size(input: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let full = (input.checked_sub(1)?) * stride + kernel;
    full.checked_sub(2 * padding).filter(|&n| n > 0)
}

/// 3-D transposed convolution followed by the layer's activation.
///
/// Input cell `(x, y, z)` of channel `ci` scatters `value * w[ci, co, a, b, c]`
/// into output cell `(z*sd + a - pd, y*sh + b - ph, x*sw + c - pw)` (depth,
/// height, width order), cells falling outside the cropped output are dropped.
/// Output channels are computed in parallel; each channel's accumulation order
/// is fixed, so the result does not depend on the thread count.
pub fn conv_transpose3d(input: &FeatureMaps, layer: &TransposedConvLayer) -> Result<FeatureMaps> {
    if input.channels != layer.in_channels {
        return Err(Error::Shape(format!("layer expects {} input channels, got {}", layer.in_channels, input.channels)));
    }
    let out_shape = layer.output_shape(input.shape)?;
    let [onx, ony, onz] = out_shape;
    let [inx, iny, inz] = input.shape;
    let [kd, kh, kw] = layer.kernel;
    let [sd, sh, sw] = layer.stride;
    let [pd, ph, pw] = layer.padding;
    let out_len = onx * ony * onz;
    let kernel_len = kd * kh * kw;
    let weights: Vec<f64> = layer.weights.iter().map(|&w| w as f64).collect();

    let mut out = vec![0.0f64; layer.out_channels * out_len];
    out.par_chunks_mut(out_len).enumerate().for_each(|(co, map)| {
        map.fill(layer.bias[co] as f64);
        for ci in 0..layer.in_channels {
            let src = input.channel(ci);
            let w = &weights[(ci * layer.out_channels + co) * kernel_len..][..kernel_len];
            for z in 0..inz {
                for y in 0..iny {
                    for x in 0..inx {
                        let v = src[x + inx * (y + iny * z)];
                        for a in 0..kd {
                            let Some(oz) = (z * sd + a).checked_sub(pd).filter(|&o| o < onz) else {
                                continue;
                            };
                            for b in 0..kh {
                                let Some(oy) = (y * sh + b).checked_sub(ph).filter(|&o| o < ony) else {
                                    continue;
                                };
                                let row = onx * (oy + ony * oz);
                                let wrow = (a * kh + b) * kw;
                                for c in 0..kw {
                                    if let Some(ox) = (x * sw + c).checked_sub(pw).filter(|&o| o < onx) {
                                        map[row + ox] += v * w[wrow + c];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        layer.activation.apply_in_place(map);
    });
    FeatureMaps::new(layer.out_channels, out_shape, out)
}

impl Activation {
    fn apply_in_place(self, values: &mut [f64]) {
        match self {
            Activation::None => {}
            Activation::LeakyRelu(alpha) => {
                let alpha = alpha as f64;
                values.iter_mut().for_each(|v| *v = super::leaky_relu(*v, alpha));
            }
            Activation::Tanh => values.iter_mut().for_each(|v| *v = v.tanh()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn layer(
        cin: usize,
        cout: usize,
        kernel: [usize; 3],
        stride: [usize; 3],
        padding: [usize; 3],
        weights: Vec<f32>,
        bias: Vec<f32>,
    ) -> TransposedConvLayer {
        TransposedConvLayer::new(cin, cout, kernel, stride, padding, weights, bias, Activation::None).unwrap()
    }

    /// Straightforward scatter-add over signed coordinates into an uncropped
    /// buffer, cropped afterwards.
    fn oracle(input: &FeatureMaps, l: &TransposedConvLayer) -> (Vec<f64>, [usize; 3]) {
        let [inx, iny, inz] = input.shape();
        let full =
            [(inx - 1) * l.stride[2] + l.kernel[2], (iny - 1) * l.stride[1] + l.kernel[1], (inz - 1) * l.stride[0] + l.kernel[0]];
        let mut buf = vec![0.0; l.out_channels * full[0] * full[1] * full[2]];
        for co in 0..l.out_channels {
            for ci in 0..l.in_channels {
                for z in 0..inz {
                    for y in 0..iny {
                        for x in 0..inx {
                            let v = input.channel(ci)[x + inx * (y + iny * z)];
                            for a in 0..l.kernel[0] {
                                for b in 0..l.kernel[1] {
                                    for c in 0..l.kernel[2] {
                                        let (fz, fy, fx) = (z * l.stride[0] + a, y * l.stride[1] + b, x * l.stride[2] + c);
                                        let w = l.weight(ci, co, a, b, c) as f64;
                                        buf[((co * full[2] + fz) * full[1] + fy) * full[0] + fx] += v * w;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        let shape = [full[0] - 2 * l.padding[2], full[1] - 2 * l.padding[1], full[2] - 2 * l.padding[0]];
        let mut out = Vec::new();
        for co in 0..l.out_channels {
            for z in 0..shape[2] {
                for y in 0..shape[1] {
                    for x in 0..shape[0] {
                        let (fz, fy, fx) = (z + l.padding[0], y + l.padding[1], x + l.padding[2]);
                        out.push(buf[((co * full[2] + fz) * full[1] + fy) * full[0] + fx] + l.bias[co] as f64);
                    }
                }
            }
        }
        (out, shape)
    }

    #[test]
    fn identity_kernel() {
        let l = layer(1, 1, [1, 1, 1], [1, 1, 1], [0, 0, 0], vec![1.0], vec![0.0]);
        let input = FeatureMaps::new(1, [2, 3, 2], (0..12).map(|v| v as f64 - 5.5).collect()).unwrap();
        assert_eq!(conv_transpose3d(&input, &l).unwrap(), input);
    }

    #[test]
    fn overlap_counts() {
        let l = layer(1, 1, [2, 2, 2], [1, 1, 1], [0, 0, 0], vec![1.0; 8], vec![0.0]);
        let input = FeatureMaps::new(1, [2, 2, 2], vec![1.0; 8]).unwrap();
        let out = conv_transpose3d(&input, &l).unwrap();
        assert_eq!(out.shape(), [3, 3, 3]);
        // overlap count factorizes per axis: 1, 2, 1
        let per_axis = [1.0, 2.0, 1.0];
        for z in 0..3 {
            for y in 0..3 {
                for x in 0..3 {
                    assert_eq!(out.data()[x + 3 * (y + 3 * z)], per_axis[x] * per_axis[y] * per_axis[z]);
                }
            }
        }
        assert_eq!(out.data()[0], 1.0);
        assert_eq!(out.data()[13], 8.0);
    }

    #[test]
    fn channel_mismatch() {
        let l = layer(2, 1, [1, 1, 1], [1, 1, 1], [0, 0, 0], vec![1.0; 2], vec![0.0]);
        let input = FeatureMaps::new(1, [1, 1, 1], vec![1.0]).unwrap();
        assert!(matches!(conv_transpose3d(&input, &l), Err(Error::Shape(_))));
    }

    #[test]
    fn non_positive_output_size() {
        assert_eq!(transposed_output_size(1, 1, 1, 1), None);
        assert_eq!(transposed_output_size(3, 5, 2, 1), Some(7));
        let l = layer(1, 1, [1, 1, 1], [1, 1, 1], [1, 0, 0], vec![1.0], vec![0.0]);
        let input = FeatureMaps::new(1, [1, 1, 2], vec![1.0; 2]).unwrap();
        assert!(conv_transpose3d(&input, &l).is_err());
    }

    #[test]
    fn matches_scatter_add_oracle_on_random_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let cin = rng.random_range(1..4);
            let cout = rng.random_range(1..4);
            let kernel = [rng.random_range(1..=4), rng.random_range(1..=4), rng.random_range(1..=4)];
            let stride = [rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=3)];
            let shape = [rng.random_range(1..5), rng.random_range(1..5), rng.random_range(1..5)];
            let padding =
                [rng.random_range(0..=kernel[0] / 2), rng.random_range(0..=kernel[1] / 2), rng.random_range(0..=kernel[2] / 2)];
            let weights = (0..cin * cout * kernel.iter().product::<usize>()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let bias = (0..cout).map(|_| rng.random_range(-1.0..1.0)).collect();
            let l = layer(cin, cout, kernel, stride, padding, weights, bias);
            let input = FeatureMaps::new(
                cin,
                shape,
                (0..cin * shape.iter().product::<usize>()).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let (expected, expected_shape) = oracle(&input, &l);
            match conv_transpose3d(&input, &l) {
                Ok(out) => {
                    assert_eq!(out.shape(), expected_shape);
                    for (a, b) in out.data().iter().zip(&expected) {
                        assert!((a - b).abs() < 1e-10);
                    }
                }
                Err(_) => assert!(expected_shape.contains(&0)),
            }
        }
    }

    #[test]
    fn linear_without_activation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let weights = (0..2 * 3 * 27).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l = layer(2, 3, [3, 3, 3], [2, 2, 2], [1, 1, 1], weights, vec![0.0; 3]);
        let mut rand_maps = || FeatureMaps::new(2, [3, 2, 4], (0..48).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let (x, y) = (rand_maps(), rand_maps());
        let (a, b) = (0.7, -1.3);
        let mix = FeatureMaps::new(2, [3, 2, 4], x.data().iter().zip(y.data()).map(|(p, q)| a * p + b * q).collect()).unwrap();
        let fx = conv_transpose3d(&x, &l).unwrap();
        let fy = conv_transpose3d(&y, &l).unwrap();
        let fm = conv_transpose3d(&mix, &l).unwrap();
        for ((m, p), q) in fm.data().iter().zip(fx.data()).zip(fy.data()) {
            assert!((m - (a * p + b * q)).abs() < 1e-10);
        }
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let weights = (0..2 * 8 * 64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bias = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l = layer(2, 8, [4, 4, 4], [2, 2, 2], [1, 1, 1], weights, bias);
        let input = FeatureMaps::new(2, [4, 4, 4], (0..128).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = single.install(|| conv_transpose3d(&input, &l).unwrap());
        let b = many.install(|| conv_transpose3d(&input, &l).unwrap());
        assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
