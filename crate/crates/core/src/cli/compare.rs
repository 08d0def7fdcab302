//! `compare`: side-by-side bias reports of two runs.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metrics::BiasReport;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub a: BiasReport,
    pub b: BiasReport,
    /// `b - a` per class.
    pub fraction_deltas: Vec<f64>,
    pub entropy_delta: f64,
    pub minority_delta: f64,
}

impl Comparison {
    pub fn new(a: BiasReport, b: BiasReport) -> Result<Self> {
        if a.fractions.len() != b.fractions.len() {
            return Err(Error::Format(format!(
                "reports cover {} and {} classes",
                a.fractions.len(),
                b.fractions.len()
            )));
        }
        let fraction_deltas = a.fractions.iter().zip(&b.fractions).map(|(x, y)| y - x).collect();
        Ok(Self {
            entropy_delta: b.balance_entropy - a.balance_entropy,
            minority_delta: b.minority_share - a.minority_share,
            fraction_deltas,
            a,
            b,
        })
    }

    /// Whether run b puts strictly more mass on the minority classes.
    pub fn improved(&self) -> bool {
        self.b.minority_share > self.a.minority_share
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("{:<16} {:>10} {:>10} {:>10}\n", "metric", "a", "b", "delta");
        for (c, d) in self.fraction_deltas.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:<16} {:>10.4} {:>10.4} {:>+10.4}",
                format!("class {c}"),
                self.a.fractions[c],
                self.b.fractions[c],
                d
            );
        }
        let _ = writeln!(
            s,
            "{:<16} {:>10.4} {:>10.4} {:>+10.4}",
            "balance_entropy", self.a.balance_entropy, self.b.balance_entropy, self.entropy_delta
        );
        let _ = writeln!(
            s,
            "{:<16} {:>10.4} {:>10.4} {:>+10.4}",
            "minority_share", self.a.minority_share, self.b.minority_share, self.minority_delta
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::bias_report;

    #[test]
    fn identical_reports_do_not_improve() {
        let r = bias_report(&[0, 1, 1, 1], 2, &[0]).unwrap();
        let c = Comparison::new(r.clone(), r).unwrap();
        assert!(c.fraction_deltas.iter().all(|&d| d == 0.0));
        assert_eq!(c.entropy_delta, 0.0);
        assert_eq!(c.minority_delta, 0.0);
        assert!(!c.improved());
    }

    #[test]
    fn positive_minority_delta() {
        let a = bias_report(&[1, 1, 1, 1], 2, &[0]).unwrap();
        let b = bias_report(&[0, 1, 1, 1], 2, &[0]).unwrap();
        let c = Comparison::new(a, b).unwrap();
        assert_eq!(c.minority_delta, 0.25);
        assert!(c.improved());
        assert!(c.to_table().contains("minority_share"));
    }

    #[test]
    fn class_count_mismatch() {
        let a = bias_report(&[0, 1], 2, &[0]).unwrap();
        let b = bias_report(&[0, 1, 2], 3, &[0]).unwrap();
        assert!(matches!(Comparison::new(a, b), Err(Error::Format(_))));
    }
}
