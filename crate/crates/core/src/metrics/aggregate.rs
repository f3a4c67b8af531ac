use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-subset weights of the six evaluation subsets, in the usual order:
/// LibriSpeech female, LibriSpeech male, VCTK-different female, VCTK-different
/// male, VCTK-common female, VCTK-common male.
pub const VPC_SUBSET_WEIGHTS: [f64; 6] = [0.25, 0.25, 0.20, 0.20, 0.05, 0.05];

const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

/// `Σ vᵢ·wᵢ` with weights that must sum to one.
pub fn weighted_average<T: Scalar>(values: &[T], weights: &[T]) -> Result<T> {
    if values.len() != weights.len() {
        return Err(Error::Shape(format!(
            "{} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    let sum: f64 = weights.iter().map(|w| w.as_f64()).sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::Config(format!("weights sum to {sum}, not 1")));
    }
    Ok(values.iter().zip(weights).map(|(&v, &w)| v * w).sum())
}

/// One metric over several evaluation subsets and their weighted average.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub metric: String,
    /// `(subset, value, weight)`.
    pub subsets: Vec<(String, f64, f64)>,
    pub value: f64,
}

impl MetricReport {
    pub fn from_subsets(metric: impl Into<String>, subsets: Vec<(String, f64, f64)>) -> Result<Self> {
        let values: Vec<f64> = subsets.iter().map(|s| s.1).collect();
        let weights: Vec<f64> = subsets.iter().map(|s| s.2).collect();
        let value = weighted_average(&values, &weights)?;
        Ok(Self {
            metric: metric.into(),
            subsets,
            value,
        })
    }

    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let width = self
            .subsets
            .iter()
            .map(|s| s.0.len())
            .max()
            .unwrap_or(0)
            .max("weighted average".len());
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>8}  {:>12}", "subset", "weight", self.metric);
        for (name, value, weight) in &self.subsets {
            let _ = writeln!(out, "{name:<width$}  {weight:>8.4}  {value:>12.4}");
        }
        let _ = writeln!(out, "{:<width$}  {:>8}  {:>12.4}", "weighted average", "", self.value);
        out
    }

    /// Machine-readable `key<TAB>value` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "metric\t{}", self.metric);
        for (name, value, weight) in &self.subsets {
            let _ = writeln!(out, "subset.{name}.value\t{value:?}");
            let _ = writeln!(out, "subset.{name}.weight\t{weight:?}");
        }
        let _ = writeln!(out, "weighted_average\t{:?}", self.value);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_weights_give_the_mean() {
        let v = [1.0, 2.0, 6.0, 7.0];
        assert_eq!(weighted_average(&v, &[0.25; 4]).unwrap(), 4.0);
    }

    #[test]
    fn weight_sum_is_enforced() {
        assert!(weighted_average(&[1.0, 2.0], &[0.5, 0.4]).is_err());
        assert!(weighted_average(&[1.0], &[0.5, 0.5]).is_err());
        assert!(weighted_average(&[1.0, 2.0], &[0.5, 0.5 + 5e-7]).is_ok());
    }

    #[test]
    fn report_renders_both_forms() {
        let r = MetricReport::from_subsets(
            "eer",
            vec![("a".into(), 10.0, 0.75), ("b".into(), 20.0, 0.25)],
        )
        .unwrap();
        assert_eq!(r.value, 12.5);
        assert!(r.to_tsv().contains("weighted_average\t12.5\n"));
        assert!(r.to_tsv().contains("subset.b.weight\t0.25\n"));
        assert!(r.to_text().contains("weighted average"));
    }
}
