use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{FeedbackError, Result};
use crate::structure::{ClassDistribution, Label3};

const DEFAULT_RULES: &str = include_str!("default_rules.json");
/// Slack applied to threshold comparisons so that shares such as
/// `0.6 − 0.4` land on the intended side of a `0.2` threshold.
const TOLERANCE: f64 = 1e-9;

/// Quantity a rule condition inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Background,
    Technique,
    Observation,
    /// Largest share minus smallest share.
    Spread,
    /// 1 when observation has strictly the largest share, else 0.
    ObservationDominant,
    /// 1 when the run-compressed label sequence is a subsequence of
    /// background, technique, observation; else 0.
    LogicalOrder,
    /// Always 1.
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "==")]
    Eq,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Ge => value >= threshold - TOLERANCE,
            Comparator::Gt => value > threshold + TOLERANCE,
            Comparator::Le => value <= threshold + TOLERANCE,
            Comparator::Lt => value < threshold - TOLERANCE,
            Comparator::Eq => (value - threshold).abs() <= TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub class: Metric,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl Condition {
    fn holds(&self, facts: &Facts) -> bool {
        self.comparator.holds(facts.get(self.class), self.threshold)
    }
}

/// One feedback rule. It fires when its primary condition, every `all`
/// condition and (if non-empty) at least one `any` condition hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRule {
    pub id: String,
    pub class: Metric,
    pub comparator: Comparator,
    pub threshold: f64,
    pub template: String,
    pub priority: i32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub all: Vec<Condition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub any: Vec<Condition>,
    /// Within a group only the first firing rule is emitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Emitted only when no other rule fired.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

impl FeedbackRule {
    fn fires(&self, facts: &Facts) -> bool {
        let primary = Condition {
            class: self.class,
            comparator: self.comparator,
            threshold: self.threshold,
        };
        primary.holds(facts)
            && self.all.iter().all(|c| c.holds(facts))
            && (self.any.is_empty() || self.any.iter().any(|c| c.holds(facts)))
    }
}

/// Validated rules in evaluation order (priority, then file order).
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    rules: Vec<FeedbackRule>,
}

impl RuleSet {
    pub fn new(mut rules: Vec<FeedbackRule>) -> Result<Self> {
        if rules.is_empty() {
            return Err(FeedbackError::Rules("rule set is empty".into()));
        }
        let mut ids = HashSet::new();
        for r in &rules {
            if !ids.insert(r.id.as_str()) {
                return Err(FeedbackError::Rules(format!("duplicate rule id `{}`", r.id)));
            }
            if r.template.trim().is_empty() {
                return Err(FeedbackError::Rules(format!("rule `{}` has an empty template", r.id)));
            }
            let thresholds = std::iter::once(r.threshold).chain(r.all.iter().chain(&r.any).map(|c| c.threshold));
            if thresholds.into_iter().any(|t| !t.is_finite()) {
                return Err(FeedbackError::Rules(format!("rule `{}` has a non-finite threshold", r.id)));
            }
        }
        if !rules.iter().any(|r| r.fallback) {
            return Err(FeedbackError::Rules("no fallback rule".into()));
        }
        rules.sort_by_key(|r| r.priority);
        Ok(Self { rules })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn rules(&self) -> &[FeedbackRule] {
        &self.rules
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::from_json(DEFAULT_RULES).expect("bundled rules are valid")
    }
}

struct Facts {
    shares: [f64; 3],
    spread: f64,
    observation_dominant: bool,
    logical_order: bool,
}

impl Facts {
    fn new(dist: &ClassDistribution, labels: &[Label3]) -> Self {
        let s = dist.shares;
        let max = s.iter().copied().fold(f64::MIN, f64::max);
        let min = s.iter().copied().fold(f64::MAX, f64::min);
        Self {
            shares: s,
            spread: max - min,
            observation_dominant: s[2] > s[0] && s[2] > s[1],
            logical_order: in_logical_order(labels),
        }
    }

    fn get(&self, m: Metric) -> f64 {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        match m {
            Metric::Background => self.shares[0],
            Metric::Technique => self.shares[1],
            Metric::Observation => self.shares[2],
            Metric::Spread => self.spread,
            Metric::ObservationDominant => flag(self.observation_dominant),
            Metric::LogicalOrder => flag(self.logical_order),
            Metric::Always => 1.0,
        }
    }
}

/// Collapses runs of equal labels, then checks the result only moves
/// forward through background, technique, observation.
pub fn in_logical_order(labels: &[Label3]) -> bool {
    let mut compressed = labels.to_vec();
    compressed.dedup();
    compressed.windows(2).all(|w| w[0] < w[1])
}

/// Comments for one abstract, in rule order. Never empty for a valid set.
pub fn abstract_feedback(rules: &RuleSet, dist: &ClassDistribution, labels: &[Label3]) -> Vec<String> {
    let facts = Facts::new(dist, labels);
    let mut groups_used = HashSet::new();
    let mut out = Vec::new();
    for r in rules.rules().iter().filter(|r| !r.fallback) {
        if !r.fires(&facts) {
            continue;
        }
        if let Some(g) = &r.group {
            if !groups_used.insert(g.as_str()) {
                continue;
            }
        }
        out.push(r.template.clone());
    }
    if out.is_empty() {
        out.extend(rules.rules().iter().filter(|r| r.fallback).map(|r| r.template.clone()));
    }
    out
}
