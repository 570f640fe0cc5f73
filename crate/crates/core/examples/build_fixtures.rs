//! Regenerates the bundled fixtures under `fixtures/`.
//!
//! * `ti_120x150x180.u8` – channel/mud training image, channels straight along
//!   y with a flat top and convex base in the x–z section.
//! * `toy_generator.facgen` – hand-set 3-layer generator, latent 2x2x2x1,
//!   output 32x32x16.
//! * `toy_latent.txt` – seeded latent used for the golden-grid check.
//!
//! The golden output itself is produced by `fixtures/golden_oracle.py`. Set
//! `FIXTURE_DIR` to write somewhere else.
//!
//! ```text
//! cargo run -p facinv-core --example build_fixtures
//! python3 crates/core/fixtures/golden_oracle.py
//! ```

use std::path::PathBuf;

use facinv_core::generator::{save_generator, Activation, GeneratorNetwork, LatentVector, TransposedConvLayer};
use facinv_core::grid::{facies_proportions, save_facies, FaciesGrid, GridDims, GridFormat, CHANNEL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TARGET_CHANNEL: f64 = 0.51;

fn training_image() -> FaciesGrid {
    let (nx, ny, nz) = (120usize, 150usize, 180usize);
    let mut cells = vec![0u8; nx * ny * nz];
    let mut rng = ChaCha8Rng::seed_from_u64(20_230_051);
    let mut channel = 0usize;
    while (channel as f64) < TARGET_CHANNEL * cells.len() as f64 {
        let width = rng.random_range(10.0..22.0f64);
        let thickness = rng.random_range(4.0..9.0f64);
        let centre = rng.random_range(-5.0..nx as f64 + 5.0);
        let top = rng.random_range(-4.0..nz as f64);
        // gentle lateral drift along y
        let drift = rng.random_range(-0.04..0.04f64);
        for j in 0..ny {
            let xc = centre + drift * (j as f64 - ny as f64 / 2.0);
            let lo = (xc - width / 2.0).floor().max(0.0) as usize;
            let hi = ((xc + width / 2.0).ceil() as usize).min(nx);
            for i in lo..hi {
                let u = 2.0 * (i as f64 + 0.5 - xc) / width;
                if u.abs() >= 1.0 {
                    continue;
                }
                let base = top + thickness * (1.0 - u * u).sqrt();
                let k0 = top.ceil().max(0.0) as usize;
                let k1 = (base.floor().max(-1.0) + 1.0) as usize;
                for k in k0..k1.min(nz) {
                    let c = &mut cells[i + nx * (j + ny * k)];
                    if *c != CHANNEL {
                        *c = CHANNEL;
                        channel += 1;
                    }
                }
            }
        }
    }
    FaciesGrid::from_vec(GridDims::new(nx, ny, nz).unwrap(), cells).unwrap()
}

/// Separable kernel from per-axis taps, `(kd, kh, kw)` order.
fn separable(d: &[f32], h: &[f32], w: &[f32], scale: f32) -> Vec<f32> {
    let mut out = Vec::with_capacity(d.len() * h.len() * w.len());
    for a in d {
        for b in h {
            for c in w {
                out.push(a * b * c * scale);
            }
        }
    }
    out
}

/// Linear ×2 upsampling taps (kernel 4, stride 2, padding 1).
const UP2: [f32; 4] = [0.25, 0.75, 0.75, 0.25];
/// Linear ×4 upsampling taps (kernel 8, stride 4, padding 2).
const UP4: [f32; 8] = [0.125, 0.375, 0.625, 0.875, 0.875, 0.625, 0.375, 0.125];

fn toy_generator() -> GeneratorNetwork {
    let alpha = 0.2f32;
    // hidden layers carry the field as a (+, -) channel pair so the leaky ReLU
    // pair reconstructs it: lrelu(v) - lrelu(-v) = (1 + alpha) v
    let k1 = separable(&UP2, &UP4, &UP4, 1.0);
    let mut w1 = k1.clone();
    w1.extend(k1.iter().map(|v| -v));
    let l1 =
        TransposedConvLayer::new(1, 2, [4, 8, 8], [2, 4, 4], [1, 2, 2], w1, vec![0.0; 2], Activation::LeakyRelu(alpha)).unwrap();

    let k2 = separable(&UP2, &UP2, &UP2, 1.0 / (1.0 + alpha));
    let mut w2 = Vec::new();
    for sign_in in [1.0f32, -1.0] {
        for sign_out in [1.0f32, -1.0] {
            w2.extend(k2.iter().map(|v| v * sign_in * sign_out));
        }
    }
    let l2 =
        TransposedConvLayer::new(2, 2, [4, 4, 4], [2, 2, 2], [1, 1, 1], w2, vec![0.0; 2], Activation::LeakyRelu(alpha)).unwrap();

    let k3 = separable(&UP2, &UP2, &UP2, 3.0 / (1.0 + alpha));
    let mut w3 = k3.clone();
    w3.extend(k3.iter().map(|v| -v));
    let l3 = TransposedConvLayer::new(2, 1, [4, 4, 4], [2, 2, 2], [1, 1, 1], w3, vec![0.0], Activation::Tanh).unwrap();

    GeneratorNetwork::new([2, 2, 2, 1], vec![l1, l2, l3]).unwrap()
}

fn main() {
    let dir = std::env::var_os("FIXTURE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir).unwrap();

    let ti = training_image();
    println!("training image proportions: {:?}", facies_proportions(&ti));
    save_facies(&ti, dir.join("ti_120x150x180.u8"), GridFormat::RawU8).unwrap();

    let net = toy_generator();
    println!("toy generator output: {:?}", net.output_shape().unwrap());
    save_generator(&net, dir.join("toy_generator.facgen")).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let latent = LatentVector::sample_uniform(net.input_shape, &mut rng);
    let text: String = latent.values().iter().map(|v| format!("{v:?}\n")).collect();
    std::fs::write(dir.join("toy_latent.txt"), text).unwrap();
}
