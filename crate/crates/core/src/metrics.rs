//! Mode assignment and class-balance summaries for generated samples.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// One representative vector per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCenters {
    centers: Vec<Vec<f64>>,
}

impl ModeCenters {
    pub fn new(centers: Vec<Vec<f64>>) -> Result<Self> {
        let dim = centers.first().map(Vec::len);
        if centers.iter().any(|c| Some(c.len()) != dim) {
            return Err(Error::Config("mode centers must share one dimension".into()));
        }
        Ok(Self { centers })
    }

    /// Per-class mean of the rows carrying each label.
    pub fn from_class_means(samples: &Matrix, labels: &[usize], num_classes: usize) -> Result<Self> {
        if labels.len() != samples.rows() {
            return Err(Error::Shape("one label per sample row required".into()));
        }
        let mut sums = vec![vec![0.0; samples.cols()]; num_classes];
        let mut counts = vec![0usize; num_classes];
        for (row, &l) in samples.iter_rows().zip(labels) {
            if l >= num_classes {
                return Err(Error::Config(format!("label {l} outside {num_classes} classes")));
            }
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(row) {
                *s += v;
            }
        }
        for (c, (s, &n)) in sums.iter_mut().zip(&counts).enumerate() {
            if n == 0 {
                return Err(Error::Config(format!("class {c} has no samples")));
            }
            s.iter_mut().for_each(|v| *v /= n as f64);
        }
        Self::new(sums)
    }

    pub fn num_classes(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers.first().map_or(0, Vec::len)
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }
}

/// Nearest center by Euclidean distance; ties go to the lowest class id.
pub fn assign_modes(samples: &Matrix, centers: &ModeCenters) -> Result<Vec<usize>> {
    if centers.num_classes() == 0 {
        return Err(Error::Config("no mode centers given".into()));
    }
    if samples.cols() != centers.dim() {
        return Err(Error::Shape(format!(
            "samples have {} columns, centers {}",
            samples.cols(),
            centers.dim()
        )));
    }
    Ok(samples
        .iter_rows()
        .map(|row| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.centers.iter().enumerate() {
                let d: f64 = row.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub fractions: Vec<f64>,
    /// Shannon entropy of `fractions` divided by `ln(num_classes)`.
    pub balance_entropy: f64,
    pub minority_share: f64,
    pub minority_classes: Vec<usize>,
    pub samples: usize,
}

pub fn bias_report(
    assignments: &[usize],
    num_classes: usize,
    minority_classes: &[usize],
) -> Result<BiasReport> {
    if assignments.is_empty() {
        return Err(Error::Config("cannot summarize an empty assignment list".into()));
    }
    if num_classes < 2 {
        return Err(Error::Config("bias summaries need at least two classes".into()));
    }
    if let Some(&bad) = minority_classes.iter().find(|&&c| c >= num_classes) {
        return Err(Error::Config(format!("minority class {bad} outside {num_classes} classes")));
    }
    let mut counts = vec![0usize; num_classes];
    for &a in assignments {
        if a >= num_classes {
            return Err(Error::Config(format!("assignment {a} outside {num_classes} classes")));
        }
        counts[a] += 1;
    }
    let total = assignments.len() as f64;
    let fractions: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let h: f64 = fractions
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    let balance_entropy = if counts.iter().filter(|&&c| c > 0).count() <= 1 {
        0.0
    } else if counts.iter().all(|&c| c == counts[0]) {
        1.0
    } else {
        (h / (num_classes as f64).ln()).clamp(0.0, 1.0)
    };
    let mut minority: Vec<usize> = minority_classes.to_vec();
    minority.sort_unstable();
    minority.dedup();
    let minority_share = minority.iter().map(|&c| fractions[c]).sum();
    Ok(BiasReport {
        fractions,
        balance_entropy,
        minority_share,
        minority_classes: minority,
        samples: assignments.len(),
    })
}

impl BiasReport {
    /// `class,fraction` rows followed by summary lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,fraction\n");
        for (c, f) in self.fractions.iter().enumerate() {
            let _ = writeln!(s, "{c},{f:?}");
        }
        let _ = writeln!(s, "balance_entropy,{:?}", self.balance_entropy);
        let _ = writeln!(s, "minority_share,{:?}", self.minority_share);
        let _ = writeln!(s, "samples,{}", self.samples);
        let minority: Vec<String> = self.minority_classes.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "minority_classes,{}", minority.join(";"));
        s
    }

    pub fn to_json(&self) -> String {
        let list = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(", ");
        format!(
            "{{\n  \"fractions\": [{}],\n  \"balance_entropy\": {:?},\n  \"minority_share\": {:?},\n  \"minority_classes\": [{}],\n  \"samples\": {}\n}}\n",
            list(&mut self.fractions.iter().map(|f| format!("{f:?}"))),
            self.balance_entropy,
            self.minority_share,
            list(&mut self.minority_classes.iter().map(usize::to_string)),
            self.samples
        )
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "class,fraction" => {}
            _ => return Err(err(1, "expected header \"class,fraction\"".into())),
        }
        let mut fractions = Vec::new();
        let (mut entropy, mut share, mut samples, mut minority) = (None, None, None, Vec::new());
        for (i, line) in lines {
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(',')
                .ok_or_else(|| err(n, format!("expected two comma-separated fields, got {line:?}")))?;
            let num = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| err(n, format!("invalid number {v:?}")))
            };
            match key.trim() {
                "balance_entropy" => entropy = Some(num(value)?),
                "minority_share" => share = Some(num(value)?),
                "samples" => {
                    samples = Some(
                        value
                            .trim()
                            .parse()
                            .map_err(|_| err(n, format!("invalid count {value:?}")))?,
                    )
                }
                "minority_classes" => {
                    minority = value
                        .split(';')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| s.trim().parse().map_err(|_| err(n, format!("invalid class {s:?}"))))
                        .collect::<Result<_>>()?
                }
                k => {
                    let class: usize = k
                        .parse()
                        .map_err(|_| err(n, format!("unknown row key {k:?}")))?;
                    if class != fractions.len() {
                        return Err(err(n, format!("class {class} out of order")));
                    }
                    fractions.push(num(value)?);
                }
            }
        }
        let missing = |what: &str| err(text.lines().count(), format!("missing {what} line"));
        Ok(Self {
            fractions,
            balance_entropy: entropy.ok_or_else(|| missing("balance_entropy"))?,
            minority_share: share.ok_or_else(|| missing("minority_share"))?,
            minority_classes: minority,
            samples: samples.ok_or_else(|| missing("samples"))?,
        })
    }
}
