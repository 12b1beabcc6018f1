use serde::{Deserialize, Serialize};

use super::{check_pair, mean, MetricError, Result};

pub fn mse(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_pair(preds, targets, 1)?;
    Ok(sum_sq(preds, targets) / preds.len() as f64)
}

pub fn mae(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_pair(preds, targets, 1)?;
    let s: f64 = preds.iter().zip(targets).map(|(x, y)| (x - y).abs()).sum();
    Ok(s / preds.len() as f64)
}

pub fn rmse(preds: &[f64], targets: &[f64]) -> Result<f64> {
    Ok(mse(preds, targets)?.sqrt())
}

pub fn max_error(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_pair(preds, targets, 1)?;
    Ok(preds
        .iter()
        .zip(targets)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

fn sum_sq(preds: &[f64], targets: &[f64]) -> f64 {
    preds.iter().zip(targets).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Which mean the r² denominator is centred on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum R2Variant {
    /// `1 − Σ(y−x)² / Σ(y−ȳ)²` where `y` are predictions and `ȳ` their mean.
    Paper,
    /// The usual coefficient of determination, centred on the target mean.
    Standard,
}

pub fn r2(preds: &[f64], targets: &[f64], variant: R2Variant) -> Result<f64> {
    check_pair(preds, targets, 2)?;
    let (centre_on, what) = match variant {
        R2Variant::Paper => (preds, "prediction"),
        R2Variant::Standard => (targets, "target"),
    };
    let m = mean(centre_on);
    let denom: f64 = centre_on.iter().map(|v| (v - m) * (v - m)).sum();
    if denom == 0.0 {
        return Err(MetricError::DegenerateVariance(what));
    }
    Ok(1.0 - sum_sq(preds, targets) / denom)
}

/// Regression evaluation summary.
///
/// Either r² is `None` when its denominator vanishes (constant predictions
/// for the paper variant, constant targets for the standard one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub r2_paper: Option<f64>,
    pub r2_standard: Option<f64>,
    pub mae: f64,
    pub rmse: f64,
    pub max_error: f64,
    pub n: usize,
}

impl EvalReport {
    pub fn evaluate(preds: &[f64], targets: &[f64]) -> Result<Self> {
        check_pair(preds, targets, 2)?;
        Ok(Self {
            r2_paper: r2(preds, targets, R2Variant::Paper).ok(),
            r2_standard: r2(preds, targets, R2Variant::Standard).ok(),
            mae: mae(preds, targets)?,
            rmse: rmse(preds, targets)?,
            max_error: max_error(preds, targets)?,
            n: preds.len(),
        })
    }
}

/// Rows are true labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub n_classes: usize,
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.trace() as f64 / total as f64
        }
    }

    pub fn with_labels<S: ToString>(mut self, labels: &[S]) -> Self {
        self.labels = labels.iter().map(|l| l.to_string()).collect();
        self
    }
}

pub fn confusion(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(MetricError::LengthMismatch {
            preds: pred.len(),
            targets: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(MetricError::TooFew { needed: 1, got: 0 });
    }
    let mut counts = vec![vec![0u64; n_classes]; n_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        for label in [p, t] {
            if label >= n_classes {
                return Err(MetricError::LabelOutOfRange { label, n_classes });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        n_classes,
        labels: (0..n_classes).map(|i| i.to_string()).collect(),
        counts,
    })
}

pub fn accuracy(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<f64> {
    Ok(confusion(pred, truth, n_classes)?.accuracy())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_example() {
        let p = [1.0, 0.0];
        let t = [0.0, 0.0];
        assert_eq!(mse(&p, &t).unwrap(), 0.5);
        assert_eq!(mae(&p, &t).unwrap(), 0.5);
        assert!((rmse(&p, &t).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(max_error(&p, &t).unwrap(), 1.0);
    }

    #[test]
    fn identical_vectors_are_zero() {
        let v = [0.2, 0.4, 0.9];
        assert_eq!(mse(&v, &v).unwrap(), 0.0);
        assert_eq!(mae(&v, &v).unwrap(), 0.0);
        assert_eq!(rmse(&v, &v).unwrap(), 0.0);
        assert_eq!(max_error(&v, &v).unwrap(), 0.0);
    }

    #[test]
    fn single_element_identity() {
        assert!((rmse(&[0.3], &[0.8]).unwrap() - 0.5).abs() < 1e-15);
        assert!((mae(&[0.3], &[0.8]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_and_mismatched_rejected() {
        assert!(matches!(mse(&[], &[]), Err(MetricError::TooFew { .. })));
        assert!(matches!(mae(&[1.0], &[1.0, 2.0]), Err(MetricError::LengthMismatch { .. })));
    }

    #[test]
    fn r2_variants() {
        let v = [0.1, 0.5, 0.7];
        assert_eq!(r2(&v, &v, R2Variant::Paper).unwrap(), 1.0);
        assert_eq!(r2(&v, &v, R2Variant::Standard).unwrap(), 1.0);
        let paper = r2(&[0.0, 1.0], &[0.1, 0.9], R2Variant::Paper).unwrap();
        assert!((paper - 0.96).abs() < 1e-12);
        assert_eq!(
            r2(&[0.4, 0.4], &[0.1, 0.9], R2Variant::Paper),
            Err(MetricError::DegenerateVariance("prediction"))
        );
        assert_eq!(
            r2(&[0.1, 0.9], &[0.4, 0.4], R2Variant::Standard),
            Err(MetricError::DegenerateVariance("target"))
        );
    }

    #[test]
    fn confusion_hand_count() {
        let m = confusion(&[0, 1], &[1, 1], 2).unwrap();
        assert_eq!(m.counts[1][0], 1);
        assert_eq!(m.counts[1][1], 1);
        assert_eq!(m.accuracy(), 0.5);
        assert_eq!(accuracy(&[0, 1], &[1, 1], 2).unwrap(), 0.5);
    }

    #[test]
    fn all_correct_is_diagonal() {
        let labels = [0, 2, 1, 2, 0];
        let m = confusion(&labels, &labels, 3).unwrap();
        assert_eq!(m.accuracy(), 1.0);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(m.counts[i][j], 0);
                }
            }
        }
    }

    #[test]
    fn label_out_of_range() {
        assert_eq!(
            confusion(&[3], &[0], 3),
            Err(MetricError::LabelOutOfRange { label: 3, n_classes: 3 })
        );
    }

    #[test]
    fn eval_report_reports_both_r2() {
        let r = EvalReport::evaluate(&[0.0, 1.0], &[0.1, 0.9]).unwrap();
        assert!((r.r2_paper.unwrap() - 0.96).abs() < 1e-12);
        assert!((r.r2_standard.unwrap() - (1.0 - 0.02 / 0.32)).abs() < 1e-12);
        let json = serde_json::to_value(&r).unwrap();
        for key in ["r2_paper", "r2_standard", "mae", "rmse", "max_error", "n"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
