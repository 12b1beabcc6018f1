use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnswerKey, IngestError, Result, Submission};

/// An answer key together with any tie warnings raised while deriving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyDerivation {
    pub key: AnswerKey,
    pub warnings: Vec<String>,
}

/// Collapses runs of whitespace and drops a trailing period.
pub fn canonical_reference(s: &str) -> String {
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.trim_end_matches('.').trim_end().to_string()
}

/// Picks the most frequent value; ties go to the smallest value under `Ord`
/// and are reported through `warnings`.
fn mode_by<T, K: Ord + Clone>(
    values: &[T],
    key_of: impl Fn(&T) -> K,
    field: &str,
    show: impl Fn(&K) -> String,
    warnings: &mut Vec<String>,
) -> usize {
    // key -> (count, first index)
    let mut counts: BTreeMap<K, (usize, usize)> = BTreeMap::new();
    for (i, v) in values.iter().enumerate() {
        counts.entry(key_of(v)).or_insert((0, i)).0 += 1;
    }
    let best = counts.values().map(|(c, _)| *c).max().unwrap_or(0);
    let mut tied = counts.iter().filter(|(_, (c, _))| *c == best);
    let (winner, (_, first_idx)) = tied.next().expect("non-empty input");
    let others: Vec<String> = tied.map(|(k, _)| show(k)).collect();
    if !others.is_empty() {
        warnings.push(format!(
            "{field}: tie between {} and {} ({best} each); chose {}",
            show(winner),
            others.join(", "),
            show(winner)
        ));
    }
    *first_idx
}

/// Total order on finite floats by numeric value.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Derives the key for `paper_id` from the modal answers of its submissions.
pub fn derive_answer_key(submissions: &[Submission], paper_id: &str) -> Result<KeyDerivation> {
    let subs: Vec<&Submission> = submissions.iter().filter(|s| s.paper_id == paper_id).collect();
    if subs.is_empty() {
        return Err(IngestError::PaperNotFound(paper_id.to_string()));
    }
    let mut warnings = Vec::new();
    let impact = mode_by(
        &subs,
        |s| OrdF64(s.impact_factor),
        "impact_factor",
        |k| k.0.to_string(),
        &mut warnings,
    );
    let rsc = mode_by(
        &subs,
        |s| canonical_reference(&s.ref_rsc),
        "ref_rsc",
        |k| format!("{k:?}"),
        &mut warnings,
    );
    let acs = mode_by(
        &subs,
        |s| canonical_reference(&s.ref_acs),
        "ref_acs",
        |k| format!("{k:?}"),
        &mut warnings,
    );
    let cited = mode_by(&subs, |s| s.times_cited, "times_cited", |k| k.to_string(), &mut warnings);
    for w in &mut warnings {
        *w = format!("paper {paper_id}: {w}");
    }
    Ok(KeyDerivation {
        key: AnswerKey {
            paper_id: paper_id.to_string(),
            impact_factor: subs[impact].impact_factor,
            ref_rsc: subs[rsc].ref_rsc.clone(),
            ref_acs: subs[acs].ref_acs.clone(),
            times_cited: subs[cited].times_cited,
        },
        warnings,
    })
}

/// One key per distinct paper id, in order of first appearance.
pub fn derive_all_keys(submissions: &[Submission]) -> Result<Vec<KeyDerivation>> {
    let mut papers: Vec<&str> = Vec::new();
    for s in submissions {
        if !papers.contains(&s.paper_id.as_str()) {
            papers.push(&s.paper_id);
        }
    }
    papers
        .into_iter()
        .map(|p| derive_answer_key(submissions, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(id: &str, cited: u64, rsc: &str) -> Submission {
        Submission {
            submission_id: id.into(),
            paper_id: "p".into(),
            impact_factor: 6.005,
            ref_rsc: rsc.into(),
            ref_acs: "acs".into(),
            times_cited: cited,
            abstract_text: "x".into(),
            human_marks: None,
        }
    }

    #[test]
    fn majority_wins() {
        let subs = [sub("a", 42, "r"), sub("b", 42, "r"), sub("c", 10, "r")];
        let d = derive_answer_key(&subs, "p").unwrap();
        assert_eq!(d.key.times_cited, 42);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn single_submission() {
        let s = sub("a", 7, "Ref");
        let d = derive_answer_key(std::slice::from_ref(&s), "p").unwrap();
        assert_eq!(d.key.times_cited, 7);
        assert_eq!(d.key.ref_rsc, "Ref");
        assert_eq!(d.key.impact_factor, 6.005);
    }

    #[test]
    fn tie_takes_smallest_and_warns() {
        // Candidates with the top count: {5, 9}. Smallest is 5.
        let subs = [sub("a", 5, "r"), sub("b", 9, "r"), sub("c", 5, "r"), sub("d", 9, "r")];
        let d = derive_answer_key(&subs, "p").unwrap();
        assert_eq!(d.key.times_cited, 5);
        assert_eq!(d.warnings.len(), 1);
        assert!(d.warnings[0].contains("times_cited"));
    }

    #[test]
    fn references_compared_canonically() {
        let subs = [
            sub("a", 1, "A.  Lator, Org. Lett., 2018."),
            sub("b", 1, "A. Lator, Org. Lett., 2018"),
            sub("c", 1, "Someone else"),
        ];
        let d = derive_answer_key(&subs, "p").unwrap();
        // raw form of the first occurrence is kept for display
        assert_eq!(d.key.ref_rsc, "A.  Lator, Org. Lett., 2018.");
    }

    #[test]
    fn missing_paper() {
        assert!(matches!(
            derive_answer_key(&[sub("a", 1, "r")], "zzz"),
            Err(IngestError::PaperNotFound(_))
        ));
    }
}
