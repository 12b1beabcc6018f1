use serde::{Deserialize, Serialize};

use super::{check_pair, mean, population_std, MetricError, Result};

/// Constants of the decaying loss weight `p(t) = min(a, a·exp(−c·(t/T − b)))`.
///
/// While `t/T ≤ b` the weight sits at `a`; afterwards it decays exponentially
/// at rate `c`, shifting the combined loss from the standard-deviation error
/// toward the squared error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSchedule {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Total number of optimizer steps `T`.
    pub total_steps: u64,
}

impl Default for LossSchedule {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.1,
            c: 10.0,
            total_steps: 1,
        }
    }
}

impl LossSchedule {
    pub fn new(a: f64, b: f64, c: f64, total_steps: u64) -> Result<Self> {
        let s = Self {
            a,
            b,
            c,
            total_steps,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_total_steps(mut self, total_steps: u64) -> Self {
        self.total_steps = total_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a <= 1.0) {
            return Err(MetricError::InvalidSchedule(format!("a = {} not in (0, 1]", self.a)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(MetricError::InvalidSchedule(format!("b = {} not in [0, 1]", self.b)));
        }
        if self.c.is_nan() || self.c < 0.0 {
            return Err(MetricError::InvalidSchedule(format!("c = {} is negative", self.c)));
        }
        if self.total_steps == 0 {
            return Err(MetricError::InvalidSchedule("T must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn weight_p(t: u64, schedule: &LossSchedule) -> Result<f64> {
    if t > schedule.total_steps {
        return Err(MetricError::StepOutOfRange {
            t,
            total: schedule.total_steps,
        });
    }
    let progress = t as f64 / schedule.total_steps as f64;
    let decayed = schedule.a * (-schedule.c * (progress - schedule.b)).exp();
    Ok(schedule.a.min(decayed))
}

/// `|σ(targets) − σ(preds)|` with population standard deviations.
pub fn stde(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_pair(preds, targets, 2)?;
    Ok((population_std(targets) - population_std(preds)).abs())
}

/// `p·STDE + (1 − p)·MSE` with `p = weight_p(t)`.
pub fn combined_loss(preds: &[f64], targets: &[f64], t: u64, schedule: &LossSchedule) -> Result<f64> {
    let p = weight_p(t, schedule)?;
    combined_loss_at(preds, targets, p)
}

/// Combined loss at an explicit weight `p`.
pub fn combined_loss_at(preds: &[f64], targets: &[f64], p: f64) -> Result<f64> {
    check_pair(preds, targets, 2)?;
    let l1 = stde(preds, targets)?;
    let l2 = super::mse(preds, targets)?;
    Ok(p * l1 + (1.0 - p) * l2)
}

/// Combined loss and its gradient with respect to `preds`.
///
/// Unlike [`combined_loss_at`] this accepts a single element (its standard
/// deviation is zero), which training needs for a short final batch. Where
/// the standard-deviation term is not differentiable (`σ(preds) = 0` or
/// `σ(preds) = σ(targets)`) its subgradient is taken as zero.
pub fn combined_loss_grad(preds: &[f64], targets: &[f64], p: f64) -> Result<(f64, Vec<f64>)> {
    check_pair(preds, targets, 1)?;
    let n = preds.len() as f64;
    let sd_p = population_std(preds);
    let sd_t = population_std(targets);
    let diff = sd_t - sd_p;
    let mse: f64 = preds
        .iter()
        .zip(targets)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n;
    let loss = p * diff.abs() + (1.0 - p) * mse;

    let mean_p = mean(preds);
    let sign = if diff > 0.0 {
        1.0
    } else if diff < 0.0 {
        -1.0
    } else {
        0.0
    };
    let grad = preds
        .iter()
        .zip(targets)
        .map(|(x, y)| {
            let d_sd = if sd_p > 0.0 { (x - mean_p) / (n * sd_p) } else { 0.0 };
            p * (-sign * d_sd) + (1.0 - p) * 2.0 * (x - y) / n
        })
        .collect();
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched(a: f64, b: f64, c: f64, t: u64) -> LossSchedule {
        LossSchedule::new(a, b, c, t).unwrap()
    }

    #[test]
    fn weight_starts_at_a() {
        assert_eq!(weight_p(0, &sched(1.0, 0.0, 1.0, 10)).unwrap(), 1.0);
    }

    #[test]
    fn weight_plateau_when_b_is_one() {
        let s = sched(1.0, 1.0, 5.0, 40);
        for t in 0..=40 {
            assert_eq!(weight_p(t, &s).unwrap(), 1.0);
        }
    }

    #[test]
    fn weight_midway_decay() {
        let p = weight_p(50, &sched(1.0, 0.2, 10.0, 100)).unwrap();
        assert!((p - (-3.0f64).exp()).abs() < 1e-9);
        assert!((p - 0.049787).abs() < 1e-6);
    }

    #[test]
    fn weight_past_horizon_is_an_error() {
        assert!(matches!(
            weight_p(11, &sched(1.0, 0.0, 1.0, 10)),
            Err(MetricError::StepOutOfRange { t: 11, total: 10 })
        ));
    }

    #[test]
    fn stde_examples() {
        assert_eq!(stde(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((stde(&[0.0, 0.0], &[0.0, 0.4]).unwrap() - 0.2).abs() < 1e-12);
        let shifted = stde(&[0.3, 0.3], &[0.0, 0.4]).unwrap();
        assert!((shifted - 0.2).abs() < 1e-12);
        assert!(stde(&[0.1], &[0.2]).is_err());
    }

    #[test]
    fn combined_hand_value() {
        let v = combined_loss_at(&[0.0, 0.0], &[0.0, 0.4], 0.5).unwrap();
        assert!((v - 0.14).abs() < 1e-12);
    }

    #[test]
    fn combined_endpoints() {
        let preds = [0.1, 0.5, 0.2];
        let targets = [0.3, 0.9, 0.0];
        let plateau = sched(1.0, 1.0, 5.0, 10);
        assert_eq!(
            combined_loss(&preds, &targets, 3, &plateau).unwrap(),
            stde(&preds, &targets).unwrap()
        );
        let vanishing = sched(1.0, 0.0, 1e6, 10);
        let v = combined_loss(&preds, &targets, 10, &vanishing).unwrap();
        assert!((v - crate::objectives::mse(&preds, &targets).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn combined_length_mismatch() {
        assert!(matches!(
            combined_loss_at(&[0.0, 1.0], &[0.0], 0.5),
            Err(MetricError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let preds = [0.2, 0.55, 0.7, 0.4];
        let targets = [0.1, 0.8, 0.3, 0.35];
        for p in [0.0, 0.3, 1.0] {
            let (_, grad) = combined_loss_grad(&preds, &targets, p).unwrap();
            for i in 0..preds.len() {
                let h = 1e-6;
                let mut up = preds;
                up[i] += h;
                let mut down = preds;
                down[i] -= h;
                let num = (combined_loss_at(&up, &targets, p).unwrap()
                    - combined_loss_at(&down, &targets, p).unwrap())
                    / (2.0 * h);
                assert!((num - grad[i]).abs() < 1e-7, "p={p} i={i}: {num} vs {}", grad[i]);
            }
        }
    }

    #[test]
    fn invalid_schedules_rejected() {
        assert!(LossSchedule::new(0.0, 0.1, 1.0, 5).is_err());
        assert!(LossSchedule::new(1.0, 1.5, 1.0, 5).is_err());
        assert!(LossSchedule::new(1.0, 0.1, -1.0, 5).is_err());
        assert!(LossSchedule::new(1.0, 0.1, 1.0, 0).is_err());
    }
}
