//! Binary model snapshots.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "FGBF" | version: u32 | layer_count: u32
//! per layer: activation tag: u8 | inputs: u32 | outputs: u32
//!            | weights: inputs*outputs f64 (row-major) | bias: outputs f64
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{Activation, DenseNet, Layer};

pub const MAGIC: &[u8; 4] = b"FGBF";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 4;
const LAYER_HEADER_LEN: usize = 1 + 4 + 4;

/// Size in bytes of the encoding of `net`.
pub fn encoded_len(net: &DenseNet) -> usize {
    HEADER_LEN
        + net
            .layers()
            .iter()
            .map(|l| LAYER_HEADER_LEN + 8 * (l.weight().as_slice().len() + l.bias().len()))
            .sum::<usize>()
}

pub fn encode(net: &DenseNet) -> Vec<u8> {
    let mut out = Vec::with_capacity(encoded_len(net));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
    for l in net.layers() {
        out.push(l.activation().tag());
        out.extend_from_slice(&(l.input_width() as u32).to_le_bytes());
        out.extend_from_slice(&(l.output_width() as u32).to_le_bytes());
        for v in l.weight().as_slice().iter().chain(l.bias()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Snapshot(format!(
                "truncated: needed {n} bytes at offset {}, {} remain",
                self.pos,
                self.buf.len() - self.pos
            ))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Snapshot("size overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn decode(bytes: &[u8]) -> Result<DenseNet> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Snapshot("bad magic, expected \"FGBF\"".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Snapshot(format!("unsupported format version {version}")));
    }
    let count = r.u32()? as usize;
    let mut layers = Vec::with_capacity(count.min(1024));
    for i in 0..count {
        let tag = r.take(1)?[0];
        let activation = Activation::from_tag(tag)
            .ok_or_else(|| Error::Snapshot(format!("layer {i}: unknown activation tag {tag}")))?;
        let inputs = r.u32()? as usize;
        let outputs = r.u32()? as usize;
        let weights = r.f64s(inputs * outputs)?;
        let bias = r.f64s(outputs)?;
        layers.push(Layer::new(Matrix::new(inputs, outputs, weights)?, bias, activation)?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Snapshot(format!(
            "{} trailing bytes after last layer",
            bytes.len() - r.pos
        )));
    }
    DenseNet::from_layers(layers)
}

pub fn save(net: &DenseNet, path: &Path) -> Result<()> {
    fs::write(path, encode(net))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<DenseNet> {
    decode(&fs::read(path)?)
}
