//! Bidirectional LSTM encoder with additive attention pooling.
//!
//! Tokens are embedded, run through a forward and a backward LSTM, and the
//! concatenated per-position states are pooled with attention
//! `score_i = vᵀ·tanh(W·h_i)`, `α = softmax(score)`. A linear head maps the
//! pooled vector to one sigmoid score (regression) or to class logits.
//!
//! Weights are stored as `f32`; every forward/backward computation runs in
//! `f64`. Backpropagation is written by hand and verified against central
//! finite differences by [`grad_check`].

mod gradcheck;
mod io;
mod model;
mod params;
mod train;

pub use gradcheck::{grad_check, grad_check_with_mutation, GradCheckReport, LossRegime};
pub use io::{load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use model::{classify_sentence, encode, predict_score, Encoding, TextModel};
pub use params::{init_params, Block, Layout, ModelParams};
pub use train::{train, Example, StepRecord, Target, TrainConfig, TrainingLog};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Head {
    Regression,
    Classification { n_classes: usize },
}

impl Head {
    pub fn outputs(&self) -> usize {
        match self {
            Head::Regression => 1,
            Head::Classification { n_classes } => *n_classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub attention_dim: usize,
    pub head: Head,
    pub seed: u64,
    pub max_sequence_length: usize,
}

impl EncoderConfig {
    pub fn new(vocab_size: usize, head: Head) -> Self {
        Self {
            vocab_size,
            embed_dim: 32,
            hidden_dim: 32,
            attention_dim: 32,
            head,
            seed: 0,
            max_sequence_length: 512,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("vocab_size", self.vocab_size),
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("attention_dim", self.attention_dim),
            ("max_sequence_length", self.max_sequence_length),
            ("head outputs", self.head.outputs()),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(NnError::Config(format!("{name} must be positive")));
            }
        }
        if let Head::Classification { n_classes } = self.head {
            if n_classes < 2 {
                return Err(NnError::Config("classification needs at least 2 classes".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum NnError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("training diverged at step {step} (loss {loss}, or non-finite gradients or weights)")]
    Diverged { step: u64, loss: f64 },
    #[error("model file: bad magic bytes")]
    BadMagic,
    #[error("model file: unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("model file: shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("model file is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Metric(#[from] crate::objectives::MetricError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NnError>;
