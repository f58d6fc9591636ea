//! Token-level classification metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Per-label F1 averaged with gold-support weights.
    pub f1_weighted: f64,
    /// Unweighted mean F1 over labels that occur in gold or predictions.
    pub f1_macro: f64,
    pub per_label: Vec<LabelStats>,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub tokens: u64,
}

/// Scores aligned gold/predicted label ids against `labels`.
pub fn compute_metrics(gold: &[usize], predicted: &[usize], labels: &[String]) -> Result<Metrics> {
    if gold.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    let k = labels.len();
    let mut confusion = vec![vec![0u64; k]; k];
    for (&g, &p) in gold.iter().zip(predicted) {
        if g >= k || p >= k {
            return Err(Error::Label(format!("label id {} outside {k} labels", g.max(p))));
        }
        confusion[g][p] += 1;
    }
    let n = gold.len() as u64;
    let correct: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };

    let mut per_label = Vec::with_capacity(k);
    let (mut weighted, mut macro_sum, mut present) = (0.0, 0.0, 0usize);
    for (i, label) in labels.iter().enumerate() {
        let tp = confusion[i][i];
        let support: u64 = confusion[i].iter().sum();
        let predicted_i: u64 = confusion.iter().map(|row| row[i]).sum();
        let precision = ratio(tp, predicted_i);
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        if support > 0 || predicted_i > 0 {
            macro_sum += f1;
            present += 1;
        }
        weighted += f1 * support as f64;
        per_label.push(LabelStats {
            label: label.clone(),
            precision,
            recall,
            f1,
            support,
        });
    }
    Ok(Metrics {
        accuracy: ratio(correct, n),
        f1_weighted: if n == 0 { 0.0 } else { weighted / n as f64 },
        f1_macro: if present == 0 { 0.0 } else { macro_sum / present as f64 },
        per_label,
        confusion,
        tokens: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("L{i}")).collect()
    }

    #[test]
    fn perfect_predictions() {
        let g = [0, 1, 2, 1, 0];
        let m = compute_metrics(&g, &g, &labels(4)).unwrap();
        assert_eq!((m.accuracy, m.f1_weighted, m.f1_macro), (1.0, 1.0, 1.0));
        assert_eq!(m.per_label[3].support, 0);
    }

    #[test]
    fn single_class_on_balanced_pair() {
        let m = compute_metrics(&[0, 0, 1, 1], &[0, 0, 0, 0], &labels(2)).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert!((m.f1_macro - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.f1_weighted - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn misaligned_input_is_an_error() {
        assert!(compute_metrics(&[0], &[0, 1], &labels(2)).is_err());
        assert!(compute_metrics(&[2], &[0], &labels(2)).is_err());
    }
}
