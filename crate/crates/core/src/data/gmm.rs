use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::ModeCenters;

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub mean: Vec<f64>,
    pub stdev: f64,
}

/// Isotropic Gaussian mixture; mode `i` is class `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureSpec {
    modes: Vec<Mode>,
}

/// Minimum pairwise mean distance, in units of the largest stdev.
pub const MIN_SEPARATION: f64 = 6.0;

pub const DEFAULT_STDEV: f64 = 0.2;

impl GaussianMixtureSpec {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        let Some(first) = modes.first() else {
            return Err(Error::Config("a mixture needs at least one mode".into()));
        };
        let dim = first.mean.len();
        if dim == 0 {
            return Err(Error::Config("mode means must be non-empty".into()));
        }
        let mut max_sd: f64 = 0.0;
        for (i, m) in modes.iter().enumerate() {
            if m.mean.len() != dim {
                return Err(Error::Config(format!("mode {i} has dimension {}, expected {dim}", m.mean.len())));
            }
            if !(m.stdev > 0.0 && m.stdev.is_finite()) || m.mean.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("mode {i} needs a finite mean and positive stdev")));
            }
            max_sd = max_sd.max(m.stdev);
        }
        for i in 0..modes.len() {
            for j in i + 1..modes.len() {
                let d = dist(&modes[i].mean, &modes[j].mean);
                if d < MIN_SEPARATION * max_sd {
                    return Err(Error::Config(format!(
                        "modes {i} and {j} are {d:.3} apart, need at least {:.3}",
                        MIN_SEPARATION * max_sd
                    )));
                }
            }
        }
        Ok(Self { modes })
    }

    /// Two 2-D modes at (-2, 0) and (2, 0) with stdev 0.2.
    pub fn two_mode_default() -> Self {
        Self::two_mode(DEFAULT_STDEV).expect("well separated")
    }

    /// Four 2-D modes on the corners of a square of side 4, stdev 0.2.
    pub fn four_mode_default() -> Self {
        Self::four_mode(DEFAULT_STDEV).expect("well separated")
    }

    /// Modes at (-2, 0) and (2, 0).
    pub fn two_mode(stdev: f64) -> Result<Self> {
        Self::isotropic(&[[-2.0, 0.0], [2.0, 0.0]], stdev)
    }

    /// Modes at (-2, -2), (2, -2), (-2, 2), (2, 2), in that class order.
    pub fn four_mode(stdev: f64) -> Result<Self> {
        Self::isotropic(&[[-2.0, -2.0], [2.0, -2.0], [-2.0, 2.0], [2.0, 2.0]], stdev)
    }

    fn isotropic(means: &[[f64; 2]], stdev: f64) -> Result<Self> {
        Self::new(means.iter().map(|m| Mode { mean: m.to_vec(), stdev }).collect())
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.modes[0].mean.len()
    }

    pub fn centers(&self) -> ModeCenters {
        ModeCenters::new(self.modes.iter().map(|m| m.mean.clone()).collect()).expect("same dimension")
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `per_mode` samples from each mode, grouped by mode.
pub fn make_gmm_dataset<R: Rng + ?Sized>(
    spec: &GaussianMixtureSpec,
    per_mode: usize,
    rng: &mut R,
) -> Result<LabeledDataset> {
    if per_mode == 0 {
        return Err(Error::Config("per_mode must be at least 1".into()));
    }
    let dim = spec.dim();
    let mut data = Vec::with_capacity(spec.modes.len() * per_mode * dim);
    let mut labels = Vec::with_capacity(spec.modes.len() * per_mode);
    for (class, mode) in spec.modes.iter().enumerate() {
        for _ in 0..per_mode {
            for &mu in &mode.mean {
                let z: f64 = StandardNormal.sample(rng);
                data.push(mu + mode.stdev * z);
            }
            labels.push(class);
        }
    }
    LabeledDataset::new(
        Matrix::from_raw(labels.len(), dim, data),
        labels,
        spec.modes.len(),
    )
}
