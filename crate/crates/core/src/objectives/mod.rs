//! Training losses and evaluation metrics.
//!
//! Vectors are `&[f64]` with predictions first and targets second. All
//! reductions run over exactly `N` elements in index order.

mod loss;
mod metrics;

pub use loss::{
    combined_loss, combined_loss_at, combined_loss_grad, stde, weight_p, LossSchedule,
};
pub use metrics::{
    accuracy, confusion, mae, max_error, mse, r2, rmse, ConfusionMatrix, EvalReport, R2Variant,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("length mismatch: {preds} predictions vs {targets} targets")]
    LengthMismatch { preds: usize, targets: usize },
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("degenerate variance: {0} values are constant")]
    DegenerateVariance(&'static str),
    #[error("training step {t} is outside the schedule horizon 0..={total}")]
    StepOutOfRange { t: u64, total: u64 },
    #[error("invalid loss schedule: {0}")]
    InvalidSchedule(String),
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
}

pub type Result<T> = std::result::Result<T, MetricError>;

pub(crate) fn check_pair(preds: &[f64], targets: &[f64], min_len: usize) -> Result<()> {
    if preds.len() != targets.len() {
        return Err(MetricError::LengthMismatch {
            preds: preds.len(),
            targets: targets.len(),
        });
    }
    if preds.len() < min_len {
        return Err(MetricError::TooFew {
            needed: min_len,
            got: preds.len(),
        });
    }
    Ok(())
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard deviation with divisor `N`.
pub(crate) fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}
