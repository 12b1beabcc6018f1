//! Mark scheme for the four short questions and the abstract.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{AnswerKey, Submission};
use crate::nn::{NnError, TextModel};
use crate::textproc::{cosine_similarity, term_vector};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("degenerate answer key: {0}")]
    DegenerateKey(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("submission `{submission}` is for paper `{found}`, key is for `{expected}`")]
    KeyMismatch {
        submission: String,
        found: String,
        expected: String,
    },
    #[error("no answer key for paper `{0}`")]
    MissingKey(String),
    #[error(transparent)]
    Model(#[from] NnError),
}

pub type Result<T> = std::result::Result<T, ScoringError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Incorrect,
    PartiallyCorrect,
    FullyCorrect,
}

impl Verdict {
    pub const ALL: [Verdict; 3] = [Verdict::Incorrect, Verdict::PartiallyCorrect, Verdict::FullyCorrect];

    pub fn value(self) -> f64 {
        match self {
            Verdict::Incorrect => 0.0,
            Verdict::PartiallyCorrect => 0.5,
            Verdict::FullyCorrect => 1.0,
        }
    }
}

/// One question's mark. `given`/`correct` are set for numeric questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub value: f64,
    pub verdict: Verdict,
    pub evidence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<f64>,
}

impl Mark {
    fn new(verdict: Verdict, evidence: String) -> Self {
        Self {
            value: verdict.value(),
            verdict,
            evidence,
            given: None,
            correct: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkSheet {
    pub submission_id: String,
    pub paper_id: String,
    pub q1_impact: Mark,
    pub q2_rsc: Mark,
    pub q3_acs: Mark,
    pub q4_cited: Mark,
    pub abstract_mark: u8,
    pub total: f64,
}

impl MarkSheet {
    pub fn questions(&self) -> [&Mark; 4] {
        [&self.q1_impact, &self.q2_rsc, &self.q3_acs, &self.q4_cited]
    }
}

/// Percentage difference relative to the correct value.
pub fn percentage_difference(given: f64, correct: f64) -> Result<f64> {
    if correct == 0.0 || !correct.is_finite() {
        return Err(ScoringError::DegenerateKey(format!("correct value {correct}")));
    }
    if !given.is_finite() {
        return Err(ScoringError::Argument(format!("given value {given}")));
    }
    Ok(100.0 * (given - correct).abs() / correct.abs())
}

/// `d ≤ 10` full, `10 < d ≤ 25` partial, otherwise incorrect.
pub fn numeric_verdict(d: f64) -> Verdict {
    if d <= 10.0 {
        Verdict::FullyCorrect
    } else if d <= 25.0 {
        Verdict::PartiallyCorrect
    } else {
        Verdict::Incorrect
    }
}

/// `s ≥ 0.9` full, `0.65 ≤ s < 0.9` partial, otherwise incorrect.
pub fn similarity_verdict(s: f64) -> Verdict {
    if s >= 0.9 {
        Verdict::FullyCorrect
    } else if s >= 0.65 {
        Verdict::PartiallyCorrect
    } else {
        Verdict::Incorrect
    }
}

pub fn score_numeric(given: f64, correct: f64) -> Result<Mark> {
    let d = percentage_difference(given, correct)?;
    let mut mark = Mark::new(numeric_verdict(d), format!("percentage difference {d:.2}%"));
    mark.given = Some(given);
    mark.correct = Some(correct);
    Ok(mark)
}

pub fn score_reference(given: &str, correct: &str) -> Result<Mark> {
    if given.trim().is_empty() || correct.trim().is_empty() {
        return Err(ScoringError::Argument("empty reference".into()));
    }
    let s = cosine_similarity(&term_vector(given), &term_vector(correct));
    Ok(Mark::new(similarity_verdict(s), format!("cosine similarity {s:.4}")))
}

/// Maps a `[0, 1]` model score onto the integer 0–6 abstract mark.
pub fn abstract_mark(score01: f64) -> Result<u8> {
    if !(0.0..=1.0).contains(&score01) {
        return Err(ScoringError::Argument(format!("score {score01} outside [0, 1]")));
    }
    Ok((score01 * 6.0).round().clamp(0.0, 6.0) as u8)
}

/// Source of the `[0, 1]` abstract score.
pub trait AbstractScorer: Sync {
    fn score(&self, submission: &Submission) -> Result<f64>;
}

impl AbstractScorer for TextModel {
    fn score(&self, submission: &Submission) -> Result<f64> {
        Ok(self.predict_score(&submission.abstract_text)?)
    }
}

/// Pre-computed abstract scores keyed by submission id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixedScores(pub BTreeMap<String, f64>);

impl AbstractScorer for FixedScores {
    fn score(&self, submission: &Submission) -> Result<f64> {
        self.0
            .get(&submission.submission_id)
            .copied()
            .ok_or_else(|| ScoringError::Argument(format!("no score for `{}`", submission.submission_id)))
    }
}

pub fn mark_submission(sub: &Submission, key: &AnswerKey, scorer: &dyn AbstractScorer) -> Result<MarkSheet> {
    if sub.paper_id != key.paper_id {
        return Err(ScoringError::KeyMismatch {
            submission: sub.submission_id.clone(),
            found: sub.paper_id.clone(),
            expected: key.paper_id.clone(),
        });
    }
    let q1_impact = score_numeric(sub.impact_factor, key.impact_factor)?;
    let q2_rsc = score_reference(&sub.ref_rsc, &key.ref_rsc)?;
    let q3_acs = score_reference(&sub.ref_acs, &key.ref_acs)?;
    let q4_cited = score_numeric(sub.times_cited as f64, key.times_cited as f64)?;
    let abstract_mark = abstract_mark(scorer.score(sub)?)?;
    let total = q1_impact.value + q2_rsc.value + q3_acs.value + q4_cited.value + f64::from(abstract_mark);
    Ok(MarkSheet {
        submission_id: sub.submission_id.clone(),
        paper_id: sub.paper_id.clone(),
        q1_impact,
        q2_rsc,
        q3_acs,
        q4_cited,
        abstract_mark,
        total,
    })
}

/// Marks every submission against the key for its paper, in parallel.
/// The result is ordered by submission id.
pub fn mark_all(subs: &[Submission], keys: &[AnswerKey], scorer: &dyn AbstractScorer) -> Result<Vec<MarkSheet>> {
    let by_paper: BTreeMap<&str, &AnswerKey> = keys.iter().map(|k| (k.paper_id.as_str(), k)).collect();
    let mut sheets = subs
        .par_iter()
        .map(|s| {
            let key = by_paper
                .get(s.paper_id.as_str())
                .ok_or_else(|| ScoringError::MissingKey(s.paper_id.clone()))?;
            mark_submission(s, key, scorer)
        })
        .collect::<Result<Vec<_>>>()?;
    sheets.sort_by(|a, b| a.submission_id.cmp(&b.submission_id));
    Ok(sheets)
}
