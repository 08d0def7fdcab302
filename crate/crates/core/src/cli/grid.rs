//! `grid`: tiles square image samples into a binary PGM.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Maps `[-1, 1]` to `[0, 255]`, clamping outside values.
pub fn to_pixel(v: f64) -> u8 {
    ((v.clamp(-1.0, 1.0) + 1.0) * 127.5).round() as u8
}

/// Side length of square images `width` values wide.
pub fn image_side(width: usize) -> Result<usize> {
    let side = (width as f64).sqrt().round() as usize;
    if width == 0 || side * side != width {
        return Err(Error::Format(format!("sample width {width} is not a perfect square")));
    }
    Ok(side)
}

/// P5 image of the first `rows * cols` samples, tiled row by row.
pub fn render_pgm(samples: &Matrix, side: usize, rows: usize, cols: usize) -> Result<Vec<u8>> {
    if image_side(samples.cols())? != side {
        return Err(Error::Format(format!(
            "samples are {} wide, expected {side}x{side} images",
            samples.cols()
        )));
    }
    let tiles = rows * cols;
    if tiles == 0 || samples.rows() < tiles {
        return Err(Error::Format(format!(
            "a {rows}x{cols} grid needs {tiles} samples, got {}",
            samples.rows()
        )));
    }
    let (w, h) = (cols * side, rows * side);
    let mut out = pgm_header(w, h).into_bytes();
    let header = out.len();
    out.resize(header + w * h, 0);
    for k in 0..tiles {
        let (tr, tc) = (k / cols, k % cols);
        for (i, &v) in samples.row(k).iter().enumerate() {
            let (r, c) = (tr * side + i / side, tc * side + i % side);
            out[header + r * w + c] = to_pixel(v);
        }
    }
    Ok(out)
}

/// Reads a sample CSV with a header row. Columns named `x<k>` are the
/// features; when none are, every column is.
pub fn read_samples_csv(text: &str, path: &Path) -> Result<Matrix> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(err(1, "empty file".into()));
    };
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let is_feature = |n: &str| n.strip_prefix('x').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()));
    let mut keep: Vec<usize> = (0..names.len()).filter(|&i| is_feature(names[i])).collect();
    if keep.is_empty() {
        keep = (0..names.len()).collect();
    }
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(err(i + 1, format!("expected {} fields, found {}", names.len(), fields.len())));
        }
        for &k in &keep {
            let v: f64 = fields[k]
                .trim()
                .parse()
                .map_err(|_| err(i + 1, format!("invalid number {:?} in column {}", fields[k], names[k])))?;
            data.push(v);
        }
        rows += 1;
    }
    Matrix::new(rows, keep.len(), data).map_err(|e| err(1, e.to_string()))
}

/// Header of an 8-bit P5 file.
pub fn pgm_header(width: usize, height: usize) -> String {
    format!("P5\n{width} {height}\n255\n")
}
