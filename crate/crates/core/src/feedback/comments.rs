use serde::{Deserialize, Serialize};

use super::{FeedbackError, Result};
use crate::scoring::{Mark, Verdict};

const DEFAULT_COMMENTS: &str = include_str!("comments.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Question {
    Impact,
    Rsc,
    Acs,
    Cited,
}

impl Question {
    pub const ALL: [Question; 4] = [Question::Impact, Question::Rsc, Question::Acs, Question::Cited];

    /// Heading used in the marks block.
    pub fn title(self) -> &'static str {
        match self {
            Question::Impact => "Impact Factor",
            Question::Rsc => "Reference in RSC format",
            Question::Acs => "Reference in ACS format",
            Question::Cited => "Number of times Cited",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictComments {
    pub fully_correct: String,
    pub partially_correct: String,
    pub incorrect: String,
}

impl VerdictComments {
    pub fn get(&self, v: Verdict) -> &str {
        match v {
            Verdict::FullyCorrect => &self.fully_correct,
            Verdict::PartiallyCorrect => &self.partially_correct,
            Verdict::Incorrect => &self.incorrect,
        }
    }
}

/// Pre-written comment for every (question, verdict) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommentTable {
    pub impact: VerdictComments,
    pub rsc: VerdictComments,
    pub acs: VerdictComments,
    pub cited: VerdictComments,
}

impl CommentTable {
    pub fn from_json(text: &str) -> Result<Self> {
        let table: Self = serde_json::from_str(text)?;
        for q in Question::ALL {
            for v in Verdict::ALL {
                if table.entry(q, v).trim().is_empty() {
                    return Err(FeedbackError::Comments(format!("empty comment for {q:?}/{v:?}")));
                }
            }
        }
        Ok(table)
    }

    pub fn entry(&self, q: Question, v: Verdict) -> &str {
        let row = match q {
            Question::Impact => &self.impact,
            Question::Rsc => &self.rsc,
            Question::Acs => &self.acs,
            Question::Cited => &self.cited,
        };
        row.get(v)
    }
}

impl Default for CommentTable {
    fn default() -> Self {
        Self::from_json(DEFAULT_COMMENTS).expect("bundled comments are valid")
    }
}

/// `, the correct answer is X, you gave Y` for an incorrect numeric mark.
pub fn correction_suffix(mark: &Mark) -> Option<String> {
    match (mark.verdict, mark.correct, mark.given) {
        (Verdict::Incorrect, Some(c), Some(g)) => Some(format!(", the correct answer is {c}, you gave {g}")),
        _ => None,
    }
}

pub fn fixed_comment(table: &CommentTable, question: Question, mark: &Mark) -> String {
    let text = table.entry(question, mark.verdict);
    match correction_suffix(mark) {
        Some(suffix) => format!("{}{suffix}.", text.trim_end_matches('.')),
        None => text.to_string(),
    }
}
