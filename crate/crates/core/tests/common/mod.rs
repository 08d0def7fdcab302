//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use fedgan_lab::data::{encode_idx_images, encode_idx_labels, IdxImages};
use fedgan_lab::matrix::Matrix;
use fedgan_lab::nn::{Activation, DenseNet, Layer};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// 8x8 synthetic digits: class `c` lights row `c`.
pub fn write_synthetic_idx(dir: &Path, per_class: usize, classes: usize) -> (PathBuf, PathBuf) {
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for i in 0..per_class * classes {
        let c = i % classes;
        for r in 0..8 {
            for col in 0..8 {
                let lit = r == c || (i + col) % 17 == 0;
                pixels.push(if lit { 255 } else { 0 });
            }
        }
        labels.push(c as u8);
    }
    let images = IdxImages {
        count: labels.len(),
        rows: 8,
        cols: 8,
        pixels,
    };
    let ip = dir.join("images-idx3-ubyte");
    let lp = dir.join("labels-idx1-ubyte");
    fs::write(&ip, encode_idx_images(&images)).unwrap();
    fs::write(&lp, encode_idx_labels(&labels)).unwrap();
    (ip, lp)
}

pub const STEP: f64 = 1e-5;
pub const TOL: f64 = 1e-4;

pub fn random_net(rng: &mut ChaCha8Rng, input: usize, last: Activation) -> DenseNet {
    let depth = rng.random_range(1..=3);
    let mut spec = Vec::new();
    for i in 0..depth {
        let width = if i + 1 == depth { rng.random_range(1..=4) } else { rng.random_range(1..=16) };
        let act = if i + 1 == depth {
            last
        } else {
            [Activation::Relu, Activation::Tanh, Activation::Sigmoid][rng.random_range(0..3)]
        };
        spec.push((width, act));
    }
    DenseNet::init(input, &spec, rng).unwrap()
}

pub fn random_batch(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(1.0)
}

/// Central differences of `loss` over every parameter of `net`.
pub fn numeric_grad(net: &DenseNet, loss: impl Fn(&DenseNet) -> f64) -> Vec<f64> {
    let base = net.flat_params();
    let mut probe = net.clone();
    (0..base.len())
        .map(|i| {
            let mut p = base.clone();
            p[i] = base[i] + STEP;
            probe.set_flat_params(&p).unwrap();
            let up = loss(&probe);
            p[i] = base[i] - STEP;
            probe.set_flat_params(&p).unwrap();
            let down = loss(&probe);
            (up - down) / (2.0 * STEP)
        })
        .collect()
}

/// A relu kink inside the difference window makes the numeric derivative
/// meaningless; such instances are skipped.
pub fn near_kink(net: &DenseNet, x: &Matrix) -> bool {
    let mut rows: Vec<Vec<f64>> = x.iter_rows().map(<[f64]>::to_vec).collect();
    for layer in net.layers() {
        let mut next = Vec::new();
        for r in &rows {
            let mut out = Vec::new();
            for j in 0..layer.output_width() {
                let mut z = layer.bias()[j];
                for (k, v) in r.iter().enumerate() {
                    z += v * layer.weight().get(k, j);
                }
                if layer.activation() == Activation::Relu && z.abs() < 1e-3 {
                    return true;
                }
                out.push(layer.activation().apply(z));
            }
            next.push(out);
        }
        rows = next;
    }
    false
}

pub fn first_output_only(net: DenseNet) -> DenseNet {
    // Rebuild so the last layer emits a single probability.
    let mut layers: Vec<Layer> = net.layers().to_vec();
    let last = layers.pop().unwrap();
    let w = last.weight();
    let col: Vec<f64> = (0..w.rows()).map(|r| w.get(r, 0)).collect();
    layers.push(
        Layer::new(Matrix::new(w.rows(), 1, col).unwrap(), vec![last.bias()[0]], Activation::Sigmoid)
            .unwrap(),
    );
    DenseNet::from_layers(layers).unwrap()
}
