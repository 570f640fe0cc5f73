//! FACGEN weight files.
//!
//! All integers and floats are little-endian:
//!
//! ```text
//! magic "FACGEN" | version u16 = 1 | input shape 4 x u32 (lx, ly, lz, channels)
//! layer count u16
//! per layer: in u32 | out u32 | kernel 3 x u32 | stride 3 x u32 | padding 3 x u32
//!            activation u8 (0 none, 1 leaky_relu, 2 tanh) | alpha f32
//!            weights f32 x in*out*kd*kh*kw ((in, out, kd, kh, kw), kw fastest)
//!            bias f32 x out
//! ```

use std::fs;
use std::path::Path;

use super::{Activation, GeneratorNetwork, TransposedConvLayer};
use crate::error::{Error, Result};

pub const FACGEN_MAGIC: &[u8; 6] = b"FACGEN";
pub const FACGEN_VERSION: u16 = 1;

pub fn load_generator(path: impl AsRef<Path>) -> Result<GeneratorNetwork> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_facgen(&bytes)
}

pub fn save_generator(network: &GeneratorNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_facgen(network)?).map_err(|e| Error::io(path, e))
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} = {v} does not fit in u32")))
}

pub fn encode_facgen(network: &GeneratorNetwork) -> Result<Vec<u8>> {
    network.validate()?;
    let mut out = Vec::new();
    out.extend_from_slice(FACGEN_MAGIC);
    out.extend_from_slice(&FACGEN_VERSION.to_le_bytes());
    for v in network.input_shape {
        out.extend_from_slice(&to_u32(v, "input shape")?.to_le_bytes());
    }
    let count = u16::try_from(network.layers.len()).map_err(|_| Error::Format("more than 65535 layers".into()))?;
    out.extend_from_slice(&count.to_le_bytes());
    for layer in &network.layers {
        for v in [layer.in_channels, layer.out_channels].into_iter().chain(layer.kernel).chain(layer.stride).chain(layer.padding)
        {
            out.extend_from_slice(&to_u32(v, "layer field")?.to_le_bytes());
        }
        out.push(layer.activation.tag());
        let alpha = match layer.activation {
            Activation::LeakyRelu(a) => a,
            _ => 0.0,
        };
        out.extend_from_slice(&alpha.to_le_bytes());
        for w in layer.weights.iter().chain(&layer.bias) {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Format(format!(
                "truncated FACGEN payload: needed {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            ))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn f32(&mut self) -> Result<f32> {
        let b = self.take(4)?;
        Ok(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| Error::Format("block size overflow".into()))?)?;
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
    }

    fn triple(&mut self) -> Result<[usize; 3]> {
        Ok([self.u32()?, self.u32()?, self.u32()?])
    }
}

pub fn decode_facgen(bytes: &[u8]) -> Result<GeneratorNetwork> {
    if bytes.len() < FACGEN_MAGIC.len() || &bytes[..6] != FACGEN_MAGIC {
        return Err(Error::Format("not a FACGEN file (bad magic)".into()));
    }
    let mut r = Reader { bytes, pos: 6 };
    let version = r.u16()?;
    if version != FACGEN_VERSION {
        return Err(Error::Format(format!("unsupported FACGEN version {version}")));
    }
    let input_shape = [r.u32()?, r.u32()?, r.u32()?, r.u32()?];
    let count = r.u16()? as usize;
    let mut layers = Vec::with_capacity(count);
    for n in 0..count {
        let in_channels = r.u32()?;
        let out_channels = r.u32()?;
        let kernel = r.triple()?;
        let stride = r.triple()?;
        let padding = r.triple()?;
        let tag = r.u8()?;
        let alpha = r.f32()?;
        let activation = match tag {
            0 => Activation::None,
            1 => Activation::LeakyRelu(alpha),
            2 => Activation::Tanh,
            t => return Err(Error::Format(format!("layer {n}: unknown activation tag {t}"))),
        };
        let weight_len = [in_channels, out_channels, kernel[0], kernel[1], kernel[2]]
            .iter()
            .try_fold(1usize, |acc, &v| acc.checked_mul(v))
            .ok_or_else(|| Error::Format(format!("layer {n}: weight block size overflow")))?;
        let weights = r.f32s(weight_len)?;
        let bias = r.f32s(out_channels)?;
        layers.push(TransposedConvLayer { in_channels, out_channels, kernel, stride, padding, weights, bias, activation });
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes after the last layer", bytes.len() - r.pos)));
    }
    GeneratorNetwork::new(input_shape, layers)
}
