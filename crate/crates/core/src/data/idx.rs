//! IDX container files as distributed with MNIST and FashionMNIST.

use std::fs;
use std::path::Path;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| Error::Truncated {
            path: path.to_path_buf(),
            expected: offset + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32, path: &Path) -> Result<()> {
    let found = be_u32(bytes, 0, path)?;
    if found != expected {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected,
            found,
        });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<IdxImages> {
    check_magic(bytes, IMAGES_MAGIC, path)?;
    let count = be_u32(bytes, 4, path)? as usize;
    let rows = be_u32(bytes, 8, path)? as usize;
    let cols = be_u32(bytes, 12, path)? as usize;
    let expected = count * rows * cols;
    let payload = &bytes[16..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found: payload.len(),
        });
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: payload[..expected].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC, path)?;
    let count = be_u32(bytes, 4, path)? as usize;
    let payload = &bytes[8..];
    if payload.len() < count {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: count,
            found: payload.len(),
        });
    }
    Ok(payload[..count].to_vec())
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IMAGES_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn to_dataset(images: &IdxImages, labels: &[u8]) -> Result<LabeledDataset> {
    if images.count != labels.len() {
        return Err(Error::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    let data = images.pixels.iter().map(|&p| f64::from(p) / 127.5 - 1.0).collect();
    let labels: Vec<usize> = labels.iter().map(|&l| usize::from(l)).collect();
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    LabeledDataset::new(
        Matrix::from_raw(images.count, images.rows * images.cols, data),
        labels,
        num_classes,
    )
}

/// Loads an image/label file pair with pixels scaled to `[-1, 1]`, optionally
/// block-averaged down to `side x side`.
pub fn load_idx(images_path: &Path, labels_path: &Path, side: Option<usize>) -> Result<LabeledDataset> {
    let images = parse_idx_images(&fs::read(images_path)?, images_path)?;
    let labels = parse_idx_labels(&fs::read(labels_path)?, labels_path)?;
    let ds = to_dataset(&images, &labels)?;
    match side {
        Some(s) if s != images.rows || s != images.cols => downsample(&ds, images.rows, images.cols, s),
        _ => Ok(ds),
    }
}

/// Block-averages square `rows x cols` images to `side x side`.
pub fn downsample(ds: &LabeledDataset, rows: usize, cols: usize, side: usize) -> Result<LabeledDataset> {
    if side == 0 || !rows.is_multiple_of(side) || !cols.is_multiple_of(side) || rows / side != cols / side {
        return Err(Error::Config(format!(
            "cannot block-average {rows}x{cols} images to {side}x{side}"
        )));
    }
    let f = rows / side;
    let norm = (f * f) as f64;
    let mut data = Vec::with_capacity(ds.len() * side * side);
    for img in ds.samples.iter_rows() {
        for br in 0..side {
            for bc in 0..side {
                let mut s = 0.0;
                for r in br * f..(br + 1) * f {
                    for c in bc * f..(bc + 1) * f {
                        s += img[r * cols + c];
                    }
                }
                data.push(s / norm);
            }
        }
    }
    LabeledDataset::new(
        Matrix::from_raw(ds.len(), side * side, data),
        ds.labels.clone(),
        ds.num_classes,
    )
}

/// Re-quantizes a dataset with pixels on the `[-1, 1]` byte grid back into
/// IDX images and labels.
pub fn to_idx(ds: &LabeledDataset, rows: usize, cols: usize) -> Result<(IdxImages, Vec<u8>)> {
    if ds.samples.cols() != rows * cols {
        return Err(Error::Shape(format!(
            "{} values per sample cannot form {rows}x{cols} images",
            ds.samples.cols()
        )));
    }
    let pixels = ds
        .samples
        .as_slice()
        .iter()
        .map(|&v| ((v + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8)
        .collect();
    let labels = ds
        .labels
        .iter()
        .map(|&l| u8::try_from(l).map_err(|_| Error::Format(format!("label {l} does not fit a byte"))))
        .collect::<Result<_>>()?;
    Ok((
        IdxImages {
            count: ds.len(),
            rows,
            cols,
            pixels,
        },
        labels,
    ))
}
