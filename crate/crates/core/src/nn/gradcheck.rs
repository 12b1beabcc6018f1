use std::collections::BTreeSet;

use serde::Serialize;

use super::model::{check_tokens, Net};
use super::params::{Block, Layout, ModelParams};
use super::train::{batch_loss_grad, Example, Objective, Target};
use super::{Head, NnError, Result};
use crate::objectives::{combined_loss_at, mse};
use crate::rng::SplitMix64;

/// Number of weights compared per check (or every candidate, if fewer).
const SAMPLED_WEIGHTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossRegime {
    Mse,
    /// Combined loss at a fixed weight `p`; needs at least two examples.
    Combined { p: f64 },
    CrossEntropy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub checked: usize,
    pub worst_index: usize,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
}

fn scores_and_targets(logits: &[Vec<f64>], batch: &[Example]) -> Result<(Vec<f64>, Vec<f64>)> {
    let preds = logits.iter().map(|l| 1.0 / (1.0 + (-l[0]).exp())).collect();
    let targets = batch
        .iter()
        .map(|ex| match ex.target {
            Target::Score(s) => Ok(s),
            Target::Class(_) => Err(NnError::Argument("class target in regression check".into())),
        })
        .collect::<Result<_>>()?;
    Ok((preds, targets))
}

/// `CE(up) − CE(down)` for one example, computed from logit differences so
/// that rounding of the O(1) loss value does not swamp tiny gradients.
fn cross_entropy_difference(up: &[f64], down: &[f64], class: usize) -> f64 {
    let max = down.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = down.iter().map(|v| (v - max).exp()).sum();
    let ratio_m1: f64 = up
        .iter()
        .zip(down)
        .map(|(u, d)| (d - max).exp() / z * (u - d).exp_m1())
        .sum();
    ratio_m1.ln_1p() - (up[class] - down[class])
}

/// `L(up) − L(down)` from forward passes only. Regression losses go through
/// the public metric functions rather than the training gradient code.
fn loss_difference(
    up: &Net<'_, f64>,
    down: &Net<'_, f64>,
    batch: &[Example],
    regime: LossRegime,
) -> Result<f64> {
    let forward = |net: &Net<'_, f64>| -> Vec<Vec<f64>> {
        batch.iter().map(|ex| net.forward(&ex.tokens).logits).collect()
    };
    let (lu, ld) = (forward(up), forward(down));
    match regime {
        LossRegime::Mse | LossRegime::Combined { .. } => {
            let (pu, t) = scores_and_targets(&lu, batch)?;
            let (pd, _) = scores_and_targets(&ld, batch)?;
            Ok(match regime {
                LossRegime::Combined { p } => combined_loss_at(&pu, &t, p)? - combined_loss_at(&pd, &t, p)?,
                _ => mse(&pu, &t)? - mse(&pd, &t)?,
            })
        }
        LossRegime::CrossEntropy => {
            let mut total = 0.0;
            for ((u, d), ex) in lu.iter().zip(&ld).zip(batch) {
                let Target::Class(c) = ex.target else {
                    return Err(NnError::Argument("score target in classification check".into()));
                };
                total += cross_entropy_difference(u, d, c);
            }
            Ok(total / batch.len() as f64)
        }
    }
}

/// Weights that can influence the loss of `batch`: everything except the
/// embedding rows of tokens that do not occur.
fn candidates(layout: &Layout, embed_dim: usize, batch: &[Example]) -> Vec<usize> {
    let emb = layout.range(Block::Embedding);
    let tokens: BTreeSet<u32> = batch.iter().flat_map(|ex| ex.tokens.iter().copied()).collect();
    let mut out: Vec<usize> = tokens
        .iter()
        .flat_map(|&t| {
            let start = emb.start + t as usize * embed_dim;
            start..start + embed_dim
        })
        .collect();
    out.extend(emb.end..layout.total());
    out
}

/// Compares backpropagated gradients with central differences
/// `(L(w+ε) − L(w−ε)) / 2ε` on a seeded random subset of weights.
///
/// Returns the largest `|a − n| / max(|a| + |n|, 1e-8)`.
pub fn grad_check(
    params: &ModelParams,
    batch: &[Example],
    regime: LossRegime,
    epsilon: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    grad_check_with_mutation(params, batch, regime, epsilon, seed, |_, _| {})
}

/// [`grad_check`] with a hook that may alter the analytic gradient before
/// comparison, e.g. to confirm that a wrong gradient is detected.
pub fn grad_check_with_mutation(
    params: &ModelParams,
    batch: &[Example],
    regime: LossRegime,
    epsilon: f64,
    seed: u64,
    mutate: impl FnOnce(&Layout, &mut [f64]),
) -> Result<GradCheckReport> {
    if !(1e-6..=1e-3).contains(&epsilon) {
        return Err(NnError::Argument(format!("epsilon {epsilon} outside [1e-6, 1e-3]")));
    }
    if batch.is_empty() {
        return Err(NnError::Argument("empty batch".into()));
    }
    let cfg = params.config().clone();
    for ex in batch {
        check_tokens(&ex.tokens, &cfg)?;
    }
    let objective = match (regime, cfg.head) {
        (LossRegime::Mse, Head::Regression) => Objective::Combined { p: 0.0 },
        (LossRegime::Combined { p }, Head::Regression) => Objective::Combined { p },
        (LossRegime::CrossEntropy, Head::Classification { .. }) => Objective::CrossEntropy,
        (r, h) => return Err(NnError::Argument(format!("regime {r:?} does not fit head {h:?}"))),
    };

    let layout = params.layout().clone();
    let mut weights: Vec<f64> = params.data().iter().map(|&w| f64::from(w)).collect();
    let refs: Vec<&Example> = batch.iter().collect();
    let (_, mut analytic) = batch_loss_grad(&Net::new(&cfg, &layout, &weights), &refs, objective, layout.total())?;
    mutate(&layout, &mut analytic);

    let mut pool = candidates(&layout, cfg.embed_dim, batch);
    SplitMix64::derive(seed, 0x4752_4144).shuffle(&mut pool);
    pool.truncate(SAMPLED_WEIGHTS);

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        checked: pool.len(),
        worst_index: 0,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
    };
    for &i in &pool {
        let orig = weights[i];
        let mut lowered = weights.clone();
        lowered[i] = orig - epsilon;
        weights[i] = orig + epsilon;
        let diff = loss_difference(
            &Net::new(&cfg, &layout, &weights),
            &Net::new(&cfg, &layout, &lowered),
            batch,
            regime,
        )?;
        weights[i] = orig;
        let numeric = diff / (2.0 * epsilon);
        let a = analytic[i];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        if rel > report.max_relative_error || !rel.is_finite() {
            report.max_relative_error = rel;
            report.worst_index = i;
            report.worst_analytic = a;
            report.worst_numeric = numeric;
        }
    }
    Ok(report)
}
