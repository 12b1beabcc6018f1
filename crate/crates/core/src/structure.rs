//! Sentence roles within abstracts.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Label5;
use crate::nn::{NnError, TextModel};
use crate::textproc::Segmenter;

/// Reference role shares (percent) of a large biomedical abstract corpus.
pub const REFERENCE_SHARES_PCT: [f64; 3] = [19.8, 33.0, 47.3];
/// Role shares (percent) previously measured on student abstracts.
/// Annotation only.
pub const STUDENT_ABSTRACT_SHARES_PCT: [f64; 3] = [49.9, 11.5, 38.6];

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("abstract has no sentences")]
    EmptyAbstract,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("classifier has {0} outputs; expected 3 or 5")]
    UnsupportedOutputs(usize),
    #[error("no fixed label for sentence `{0}`")]
    UnknownSentence(String),
    #[error(transparent)]
    Model(#[from] NnError),
}

pub type Result<T> = std::result::Result<T, StructureError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label3 {
    Background,
    Technique,
    Observation,
}

impl Label3 {
    pub const ALL: [Label3; 3] = [Label3::Background, Label3::Technique, Label3::Observation];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label3::Background => "BACKGROUND",
            Label3::Technique => "TECHNIQUE",
            Label3::Observation => "OBSERVATION",
        }
    }

    /// One-letter tag: `B`, `T` or `O`.
    pub fn tag(self) -> char {
        match self {
            Label3::Background => 'B',
            Label3::Technique => 'T',
            Label3::Observation => 'O',
        }
    }
}

impl fmt::Display for Label3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn map_label(label: Label5) -> Label3 {
    match label {
        Label5::Background | Label5::Objective => Label3::Background,
        Label5::Method => Label3::Technique,
        Label5::Result | Label5::Conclusion => Label3::Observation,
    }
}

/// Produces a probability triple (background, technique, observation).
pub trait SentenceClassifier: Sync {
    fn classify(&self, sentence: &str) -> Result<[f64; 3]>;
}

/// A 3-class head is used directly; a 5-class head has its probabilities
/// summed through [`map_label`].
impl SentenceClassifier for TextModel {
    fn classify(&self, sentence: &str) -> Result<[f64; 3]> {
        let probs = self.classify_sentence(sentence)?;
        let mut out = [0.0; 3];
        match probs.len() {
            3 => out.copy_from_slice(&probs),
            5 => {
                for (i, p) in probs.iter().enumerate() {
                    let l5 = Label5::from_index(i).expect("index below 5");
                    out[map_label(l5).index()] += p;
                }
            }
            n => return Err(StructureError::UnsupportedOutputs(n)),
        }
        Ok(out)
    }
}

/// Labels looked up by exact (trimmed) sentence text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixedLabels(pub HashMap<String, Label3>);

impl FixedLabels {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Label3)>) -> Self {
        Self(pairs.into_iter().map(|(s, l)| (s.trim().to_string(), l)).collect())
    }
}

impl SentenceClassifier for FixedLabels {
    fn classify(&self, sentence: &str) -> Result<[f64; 3]> {
        let label = self
            .0
            .get(sentence.trim())
            .ok_or_else(|| StructureError::UnknownSentence(sentence.to_string()))?;
        let mut out = [0.0; 3];
        out[label.index()] = 1.0;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub text: String,
    pub label: Label3,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabeledAbstract {
    pub sentences: Vec<LabeledSentence>,
}

impl LabeledAbstract {
    pub fn labels(&self) -> Vec<Label3> {
        self.sentences.iter().map(|s| s.label).collect()
    }
}

/// First index of the largest probability.
fn argmax(p: &[f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if p[i] > p[best] {
            best = i;
        }
    }
    best
}

pub fn classify_abstract(
    text: &str,
    classifier: &dyn SentenceClassifier,
    segmenter: &Segmenter,
) -> Result<LabeledAbstract> {
    let sentences = segmenter.segment(text);
    if sentences.is_empty() {
        return Err(StructureError::EmptyAbstract);
    }
    let sentences = sentences
        .into_iter()
        .map(|text| {
            let p = classifier.classify(&text)?;
            let best = argmax(&p);
            Ok(LabeledSentence {
                label: Label3::ALL[best],
                confidence: p[best],
                text,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledAbstract { sentences })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub shares: [f64; 3],
    pub counts: [usize; 3],
    pub n_classes_present: usize,
}

impl ClassDistribution {
    pub fn from_labels(labels: &[Label3]) -> Result<Self> {
        if labels.is_empty() {
            return Err(StructureError::EmptyAbstract);
        }
        let mut counts = [0usize; 3];
        for l in labels {
            counts[l.index()] += 1;
        }
        Ok(Self::from_counts(counts))
    }

    fn from_counts(counts: [usize; 3]) -> Self {
        let n: usize = counts.iter().sum();
        Self {
            shares: counts.map(|c| c as f64 / n as f64),
            counts,
            n_classes_present: counts.iter().filter(|&&c| c > 0).count(),
        }
    }

    pub fn share(&self, label: Label3) -> f64 {
        self.shares[label.index()]
    }
}

pub fn distribution(labeled: &LabeledAbstract) -> Result<ClassDistribution> {
    ClassDistribution::from_labels(&labeled.labels())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub n_abstracts: usize,
    pub n_sentences: usize,
    pub pooled: ClassDistribution,
    /// Fraction of abstracts that use at most two of the three roles.
    pub at_most_two_classes: f64,
    pub reference_shares_pct: [f64; 3],
    pub student_abstract_shares_pct: [f64; 3],
}

pub fn corpus_stats(abstracts: &[LabeledAbstract]) -> Result<CorpusReport> {
    if abstracts.is_empty() {
        return Err(StructureError::Argument("no abstracts".into()));
    }
    let mut counts = [0usize; 3];
    let mut narrow = 0usize;
    for a in abstracts {
        let d = distribution(a)?;
        for (c, k) in counts.iter_mut().zip(d.counts) {
            *c += k;
        }
        if d.n_classes_present <= 2 {
            narrow += 1;
        }
    }
    let pooled = ClassDistribution::from_counts(counts);
    Ok(CorpusReport {
        n_abstracts: abstracts.len(),
        n_sentences: counts.iter().sum(),
        pooled,
        at_most_two_classes: narrow as f64 / abstracts.len() as f64,
        reference_shares_pct: REFERENCE_SHARES_PCT,
        student_abstract_shares_pct: STUDENT_ABSTRACT_SHARES_PCT,
    })
}
