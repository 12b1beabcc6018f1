//! Comments on marks and abstract structure, and report rendering.

mod comments;
mod render;
mod rules;

pub use comments::{correction_suffix, fixed_comment, CommentTable, Question, VerdictComments};
pub use render::{marks_block, render_report, ReportFormat};
pub use rules::{abstract_feedback, in_logical_order, Comparator, Condition, FeedbackRule, Metric, RuleSet};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{AnswerKey, Submission};
use crate::scoring::{mark_submission, AbstractScorer, MarkSheet, ScoringError};
use crate::structure::{classify_abstract, distribution, ClassDistribution, LabeledAbstract, SentenceClassifier, StructureError};
use crate::textproc::Segmenter;

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error("invalid rule set: {0}")]
    Rules(String),
    #[error("invalid comment table: {0}")]
    Comments(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

pub type Result<T> = std::result::Result<T, FeedbackError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionComments {
    pub impact: String,
    pub rsc: String,
    pub acs: String,
    pub cited: String,
}

impl QuestionComments {
    pub fn iter(&self) -> impl Iterator<Item = (Question, &str)> {
        Question::ALL
            .into_iter()
            .zip([&self.impact, &self.rsc, &self.acs, &self.cited])
            .map(|(q, s)| (q, s.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub submission_id: String,
    pub marks: MarkSheet,
    pub question_comments: QuestionComments,
    pub labeled_abstract: LabeledAbstract,
    pub distribution: ClassDistribution,
    pub abstract_comments: Vec<String>,
}

/// Everything needed to turn a submission into a [`FeedbackReport`].
pub struct Grader<'a> {
    pub scorer: &'a dyn AbstractScorer,
    pub classifier: &'a dyn SentenceClassifier,
    pub segmenter: &'a Segmenter,
    pub rules: &'a RuleSet,
    pub comments: &'a CommentTable,
}

impl Grader<'_> {
    pub fn report(&self, sub: &Submission, key: &AnswerKey) -> Result<FeedbackReport> {
        let marks = mark_submission(sub, key, self.scorer)?;
        let labeled = classify_abstract(&sub.abstract_text, self.classifier, self.segmenter)?;
        let dist = distribution(&labeled)?;
        let abstract_comments = abstract_feedback(self.rules, &dist, &labeled.labels());
        let c = |q, m| fixed_comment(self.comments, q, m);
        let question_comments = QuestionComments {
            impact: c(Question::Impact, &marks.q1_impact),
            rsc: c(Question::Rsc, &marks.q2_rsc),
            acs: c(Question::Acs, &marks.q3_acs),
            cited: c(Question::Cited, &marks.q4_cited),
        };
        Ok(FeedbackReport {
            submission_id: sub.submission_id.clone(),
            marks,
            question_comments,
            labeled_abstract: labeled,
            distribution: dist,
            abstract_comments,
        })
    }

    /// Reports for every submission, ordered by submission id.
    pub fn reports(&self, subs: &[Submission], keys: &[AnswerKey]) -> Result<Vec<FeedbackReport>> {
        let by_paper: BTreeMap<&str, &AnswerKey> = keys.iter().map(|k| (k.paper_id.as_str(), k)).collect();
        let mut out = subs
            .par_iter()
            .map(|s| {
                let key = by_paper
                    .get(s.paper_id.as_str())
                    .ok_or_else(|| ScoringError::MissingKey(s.paper_id.clone()))?;
                self.report(s, key)
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| a.submission_id.cmp(&b.submission_id));
        Ok(out)
    }
}
