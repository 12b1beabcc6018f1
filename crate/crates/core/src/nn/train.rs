use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{check_tokens, softmax, truncate, Net, Trace, Weight};
use super::params::ModelParams;
use super::{Head, NnError, Result};
use crate::objectives::{combined_loss_grad, weight_p, LossSchedule};
use crate::rng::SplitMix64;
use crate::textproc::Vocabulary;

/// Samples per gradient-accumulation chunk. Chunks are summed in index
/// order, so results do not depend on the number of worker threads.
const CHUNK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Score(f64),
    Class(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub tokens: Vec<u32>,
    pub target: Target,
}

impl Example {
    /// Tokenizes `text`, truncating to `max_len` pieces.
    pub fn from_text(vocab: &Vocabulary, text: &str, target: Target, max_len: usize) -> Result<Self> {
        let seq = vocab.tokenize(text);
        if seq.is_empty() {
            return Err(NnError::Argument(format!("text {text:?} has no tokens")));
        }
        Ok(Self {
            tokens: truncate(&seq.ids, max_len).to_vec(),
            target,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Used by the regression head only; `total_steps` is recomputed from
    /// the data size, epochs and batch size.
    pub schedule: LossSchedule,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            schedule: LossSchedule::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn total_steps(&self, n_examples: usize) -> u64 {
        (self.epochs * n_examples.div_ceil(self.batch_size)) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub epoch: usize,
    /// Loss weight `p(t)`; absent for classification.
    pub p: Option<f64>,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub total_steps: u64,
    pub steps: Vec<StepRecord>,
    /// Mean step loss per epoch.
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Objective {
    /// `p·STDE + (1 − p)·MSE` over sigmoid outputs.
    Combined { p: f64 },
    CrossEntropy,
}

/// Batch loss and its gradient with respect to every weight.
pub(crate) fn batch_loss_grad<W: Weight>(
    net: &Net<'_, W>,
    batch: &[&Example],
    objective: Objective,
    n_weights: usize,
) -> Result<(f64, Vec<f64>)> {
    let traces: Vec<Trace> = batch.par_iter().map(|ex| net.forward(&ex.tokens)).collect();
    let (loss, d_logits) = loss_and_output_grads(&traces, batch, objective)?;

    let partials: Vec<Vec<f64>> = traces
        .par_chunks(CHUNK)
        .zip(d_logits.par_chunks(CHUNK))
        .map(|(trs, dls)| {
            let mut g = vec![0.0; n_weights];
            for (tr, dl) in trs.iter().zip(dls) {
                net.backward(tr, dl, &mut g);
            }
            g
        })
        .collect();
    let mut grad = vec![0.0; n_weights];
    for part in &partials {
        for (g, p) in grad.iter_mut().zip(part) {
            *g += p;
        }
    }
    Ok((loss, grad))
}

fn loss_and_output_grads(
    traces: &[Trace],
    batch: &[&Example],
    objective: Objective,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let n = batch.len() as f64;
    match objective {
        Objective::Combined { p } => {
            let preds: Vec<f64> = traces.iter().map(|t| 1.0 / (1.0 + (-t.logits[0]).exp())).collect();
            let targets = batch
                .iter()
                .map(|ex| match ex.target {
                    Target::Score(s) => Ok(s),
                    Target::Class(_) => Err(NnError::Argument("class target for regression head".into())),
                })
                .collect::<Result<Vec<f64>>>()?;
            let (loss, d_pred) = combined_loss_grad(&preds, &targets, p)?;
            let d_logits = preds
                .iter()
                .zip(&d_pred)
                .map(|(y, d)| vec![d * y * (1.0 - y)])
                .collect();
            Ok((loss, d_logits))
        }
        Objective::CrossEntropy => {
            let mut loss = 0.0;
            let mut d_logits = Vec::with_capacity(batch.len());
            for (tr, ex) in traces.iter().zip(batch) {
                let Target::Class(c) = ex.target else {
                    return Err(NnError::Argument("score target for classification head".into()));
                };
                let mut probs = softmax(&tr.logits);
                loss -= probs[c].ln();
                probs[c] -= 1.0;
                d_logits.push(probs.into_iter().map(|v| v / n).collect());
            }
            Ok((loss / n, d_logits))
        }
    }
}

fn check_examples(data: &[Example], params: &ModelParams) -> Result<()> {
    let cfg = params.config();
    for ex in data {
        check_tokens(&ex.tokens, cfg)?;
        match (cfg.head, ex.target) {
            (Head::Regression, Target::Score(s)) if s.is_finite() => {}
            (Head::Classification { n_classes }, Target::Class(c)) if c < n_classes => {}
            (head, target) => {
                return Err(NnError::Argument(format!(
                    "target {target:?} does not fit head {head:?}"
                )))
            }
        }
    }
    Ok(())
}

/// Mini-batch training with Adam.
///
/// Each epoch visits the examples in a fresh seeded shuffle. Regression
/// uses the combined loss with weight `p(t)` at step `t`; classification
/// uses mean cross-entropy. Weights are kept in `f32` between steps.
pub fn train(data: &[Example], config: &TrainConfig, mut params: ModelParams) -> Result<(ModelParams, TrainingLog)> {
    if data.is_empty() {
        return Err(NnError::Argument("no training data".into()));
    }
    if config.epochs == 0 || config.batch_size == 0 || config.learning_rate.is_nan() || config.learning_rate <= 0.0 {
        return Err(NnError::Config(
            "epochs, batch_size and learning_rate must be positive".into(),
        ));
    }
    check_examples(data, &params)?;

    let total = config.total_steps(data.len());
    let schedule = config.schedule.with_total_steps(total);
    schedule.validate()?;
    let regression = params.config().head == Head::Regression;

    let n_weights = params.layout().total();
    let mut m = vec![0.0f64; n_weights];
    let mut v = vec![0.0f64; n_weights];
    let mut rng = SplitMix64::derive(config.seed, 0x5348_5546);
    let mut log = TrainingLog {
        total_steps: total,
        ..Default::default()
    };
    let mut t: u64 = 0;
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..config.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        let mut epoch_steps = 0usize;
        for idx in order.chunks(config.batch_size) {
            let batch: Vec<&Example> = idx.iter().map(|&i| &data[i]).collect();
            let (objective, p) = if regression {
                let p = weight_p(t, &schedule)?;
                (Objective::Combined { p }, Some(p))
            } else {
                (Objective::CrossEntropy, None)
            };
            let (loss, grad) = {
                let cfg = params.config().clone();
                let net = Net::new(&cfg, params.layout(), params.data());
                batch_loss_grad(&net, &batch, objective, n_weights)?
            };
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(NnError::Diverged { step: t, loss });
            }

            let step = (t + 1) as i32;
            let bc1 = 1.0 - config.beta1.powi(step);
            let bc2 = 1.0 - config.beta2.powi(step);
            for (k, w) in params.data_mut().iter_mut().enumerate() {
                let g = grad[k];
                m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
                v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
                let update = config.learning_rate * (m[k] / bc1) / ((v[k] / bc2).sqrt() + config.epsilon);
                *w = (f64::from(*w) - update) as f32;
            }
            if !params.is_finite() {
                return Err(NnError::Diverged { step: t, loss });
            }

            log.steps.push(StepRecord { t, epoch, p, loss });
            epoch_loss += loss;
            epoch_steps += 1;
            t += 1;
        }
        log.epoch_losses.push(epoch_loss / epoch_steps as f64);
    }
    Ok((params, log))
}
