//! Corpus and submission ingestion.
//!
//! Parsers for the scored-text TSV corpora, the sentence-labelled abstract
//! corpus and the JSON submission/answer-key files, plus score
//! normalization, seeded splitting and answer-key derivation.

mod keys;
mod rct;
mod tsv;

pub use keys::{canonical_reference, derive_answer_key, derive_all_keys, KeyDerivation};
pub use rct::{parse_rct, serialize_rct, Label5, RctAbstract};
pub use tsv::{parse_scored_tsv, TsvLayout};

use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is empty")]
    EmptyInput,
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("prompt `{0}` has a degenerate score range (max == min)")]
    DegenerateRange(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("no submissions for paper `{0}`")]
    PaperNotFound(String),
    #[error("invalid submission `{id}`: {message}")]
    InvalidSubmission { id: String, message: String },
    #[error("duplicate answer key for paper `{0}`")]
    DuplicateKey(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, IngestError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub sample_id: String,
    pub prompt_id: String,
    pub text: String,
    pub raw_score: f64,
    pub min_score: f64,
    pub max_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSample {
    pub sample_id: String,
    pub prompt_id: String,
    pub text: String,
    pub score01: f64,
}

/// Min-max normalizes every sample against its own prompt's score range.
pub fn normalize_scores(samples: &[RawSample]) -> Result<Vec<NormalizedSample>> {
    samples
        .iter()
        .map(|s| {
            let span = s.max_score - s.min_score;
            if span == 0.0 {
                return Err(IngestError::DegenerateRange(s.prompt_id.clone()));
            }
            Ok(NormalizedSample {
                sample_id: s.sample_id.clone(),
                prompt_id: s.prompt_id.clone(),
                text: s.text.clone(),
                score01: (s.raw_score - s.min_score) / span,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub eval: Vec<T>,
    pub seed: u64,
    pub fraction: f64,
}

/// Shuffles a copy of `items` with [`SplitMix64`] seeded by `seed`, then
/// takes the first `round(fraction·N)` items as the training part.
pub fn split<T: Clone>(items: &[T], fraction: f64, seed: u64) -> Result<DatasetSplit<T>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(IngestError::Argument(format!(
            "split fraction {fraction} must lie strictly between 0 and 1"
        )));
    }
    if items.len() < 2 {
        return Err(IngestError::Argument(format!(
            "need at least 2 items to split, got {}",
            items.len()
        )));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let n_train = (fraction * items.len() as f64).round() as usize;
    let (head, tail) = order.split_at(n_train);
    Ok(DatasetSplit {
        train: head.iter().map(|&i| items[i].clone()).collect(),
        eval: tail.iter().map(|&i| items[i].clone()).collect(),
        seed,
        fraction,
    })
}

/// Marks assigned by a human marker, as recorded in a submission file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanMarks {
    pub q1_impact: f64,
    pub q2_rsc: f64,
    pub q3_acs: f64,
    pub q4_cited: f64,
    pub abstract_mark: u8,
}

impl HumanMarks {
    pub fn total(&self) -> f64 {
        self.q1_impact + self.q2_rsc + self.q3_acs + self.q4_cited + f64::from(self.abstract_mark)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub submission_id: String,
    pub paper_id: String,
    pub impact_factor: f64,
    pub ref_rsc: String,
    pub ref_acs: String,
    pub times_cited: u64,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_marks: Option<HumanMarks>,
}

impl Submission {
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: &str| IngestError::InvalidSubmission {
            id: self.submission_id.clone(),
            message: message.to_string(),
        };
        if self.abstract_text.trim().is_empty() {
            return Err(invalid("abstract is empty"));
        }
        if self.impact_factor.is_nan() || self.impact_factor <= 0.0 {
            return Err(invalid("impact factor must be positive"));
        }
        if let Some(h) = &self.human_marks {
            if h.abstract_mark > 6 {
                return Err(invalid("human abstract mark exceeds 6"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub paper_id: String,
    pub impact_factor: f64,
    pub ref_rsc: String,
    pub ref_acs: String,
    pub times_cited: u64,
}

/// Reads a JSON array of submissions and validates each one.
pub fn load_submissions<R: Read>(reader: R) -> Result<Vec<Submission>> {
    let subs: Vec<Submission> = serde_json::from_reader(reader)?;
    for s in &subs {
        s.validate()?;
    }
    Ok(subs)
}

/// Reads a JSON array of answer keys; paper ids must be unique.
pub fn load_answer_keys<R: Read>(reader: R) -> Result<Vec<AnswerKey>> {
    let keys: Vec<AnswerKey> = serde_json::from_reader(reader)?;
    let mut seen = HashSet::new();
    for k in &keys {
        if !seen.insert(k.paper_id.as_str()) {
            return Err(IngestError::DuplicateKey(k.paper_id.clone()));
        }
    }
    Ok(keys)
}
