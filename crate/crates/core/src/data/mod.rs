//! Labeled datasets: synthetic Gaussian mixtures, IDX ingestion, and
//! client partitioning.

mod gmm;
mod idx;
mod partition;

pub use gmm::{make_gmm_dataset, GaussianMixtureSpec, Mode, DEFAULT_STDEV, MIN_SEPARATION};
pub use idx::{
    downsample, encode_idx_images, encode_idx_labels, load_idx, parse_idx_images,
    parse_idx_labels, to_idx, IdxImages, IMAGES_MAGIC, LABELS_MAGIC,
};
pub use partition::{partition, partition_indices, ClientAllocation, PartitionSpec};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub samples: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl LabeledDataset {
    pub fn new(samples: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.len() != samples.rows() {
            return Err(Error::Shape(format!(
                "{} labels for {} samples",
                labels.len(),
                samples.rows()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::Shape(format!("label {l} outside {num_classes} classes")));
        }
        Ok(Self {
            samples,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            samples: self.samples.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }

    /// CSV with header `x0,..,x{d-1},label`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for c in 0..self.samples.cols() {
            let _ = write!(s, "x{c},");
        }
        s.push_str("label\n");
        for (row, l) in self.samples.iter_rows().zip(&self.labels) {
            for v in row {
                let _ = write!(s, "{v:?},");
            }
            let _ = writeln!(s, "{l}");
        }
        s
    }
}
