//! Offline ranking metrics.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("AUC needs at least one positive and one negative label")]
    SingleClass,
    #[error("scores and labels differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("score {0} is not finite")]
    NonFinite(f64),
}

fn check(scores: &[f64], labels: &[u8]) -> Result<(usize, usize), MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::Length(scores.len(), labels.len()));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(MetricError::NonFinite(*s));
    }
    let pos = labels.iter().filter(|&&l| l != 0).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricError::SingleClass);
    }
    Ok((pos, neg))
}

/// Probability that a random positive outscores a random negative, ties
/// counted one half. Rank-sum over sorted scores with averaged tie ranks,
/// kept in integer half-units so the result is exact.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64, MetricError> {
    let (pos, neg) = check(scores, labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum of positives (1-based ranks, ties averaged)
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let twice_avg = (i + 1 + j + 1) as u128;
        let positives = idx[i..=j].iter().filter(|&&k| labels[k] != 0).count() as u128;
        twice_rank_sum += twice_avg * positives;
        i = j + 1;
    }
    let p = pos as u128;
    // wins + ties/2 = rank_sum - p(p+1)/2, doubled
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2.0 * pos as f64 * neg as f64))
}

/// O(n²) reference definition.
pub fn auc_brute_force(scores: &[f64], labels: &[u8]) -> Result<f64, MetricError> {
    let (pos, neg) = check(scores, labels)?;
    let mut twice = 0u64;
    for i in 0..scores.len() {
        if labels[i] == 0 {
            continue;
        }
        for j in 0..scores.len() {
            if labels[j] != 0 {
                continue;
            }
            if scores[i] > scores[j] {
                twice += 2;
            } else if scores[i] == scores[j] {
                twice += 1;
            }
        }
    }
    Ok(twice as f64 / (2.0 * pos as f64 * neg as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub auc: f64,
    pub samples: usize,
    pub positives: usize,
    pub positive_rate: f64,
}

impl MetricReport {
    /// Accuracy at a 0.5 probability threshold plus AUC.
    pub fn compute(probabilities: &[f64], labels: &[u8]) -> Result<MetricReport, MetricError> {
        let auc = auc(probabilities, labels)?;
        let correct = probabilities.iter().zip(labels).filter(|(p, l)| (**p >= 0.5) == (**l != 0)).count();
        let positives = labels.iter().filter(|&&l| l != 0).count();
        let n = labels.len();
        Ok(MetricReport {
            accuracy: correct as f64 / n as f64,
            auc,
            samples: n,
            positives,
            positive_rate: positives as f64 / n as f64,
        })
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples\t{}", self.samples)?;
        writeln!(f, "positives\t{}", self.positives)?;
        writeln!(f, "positive_rate\t{:.6}", self.positive_rate)?;
        writeln!(f, "accuracy\t{:.6}", self.accuracy)?;
        write!(f, "auc\t{:.6}", self.auc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.1, 0.2], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.9, 0.8, 0.3], &[1, 0, 1]).unwrap(), 0.5);
        assert_eq!(auc(&[0.4; 5], &[1, 0, 1, 0, 0]).unwrap(), 0.5);
        assert_eq!(auc(&[0.1, 0.2], &[1, 1]), Err(MetricError::SingleClass));
    }

    #[test]
    fn matches_brute_force_with_ties() {
        let scores = [0.3, 0.3, 0.1, 0.9, 0.3, 0.5, 0.5, 0.0];
        let labels = [1, 0, 0, 1, 1, 0, 1, 0];
        assert_eq!(auc(&scores, &labels).unwrap(), auc_brute_force(&scores, &labels).unwrap());
    }

    #[test]
    fn report_accuracy() {
        let r = MetricReport::compute(&[0.9, 0.4, 0.6, 0.1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.positive_rate, 0.5);
        assert_eq!(r.auc, 0.75);
    }
}
