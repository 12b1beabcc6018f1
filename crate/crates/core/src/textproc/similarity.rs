use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Sparse lowercase term counts. Zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermVector(BTreeMap<String, u32>);

impl TermVector {
    pub fn get(&self, term: &str) -> u32 {
        self.0.get(term).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Multiplies every count by `k`; `k == 0` empties the vector.
    pub fn scaled(&self, k: u32) -> Self {
        if k == 0 {
            return Self::default();
        }
        Self(self.0.iter().map(|(t, c)| (t.clone(), c * k)).collect())
    }

    fn add(&mut self, term: String) {
        *self.0.entry(term).or_insert(0) += 1;
    }
}

impl FromIterator<(String, u32)> for TermVector {
    fn from_iter<I: IntoIterator<Item = (String, u32)>>(iter: I) -> Self {
        let mut v = BTreeMap::new();
        for (t, c) in iter {
            if c > 0 {
                *v.entry(t).or_insert(0) += c;
            }
        }
        Self(v)
    }
}

/// `A.`, `J.-L.`, `e.g.`: every hyphen-separated part is letter-period pairs.
fn is_initials(piece: &str) -> bool {
    piece.split('-').all(|part| {
        let chars: Vec<char> = part.chars().collect();
        !chars.is_empty()
            && chars.len().is_multiple_of(2)
            && chars
                .chunks(2)
                .all(|pair| pair[0].is_alphabetic() && pair[1] == '.')
    })
}

/// Lowercase word counts.
///
/// Everything except letters, digits, `-` and `.` separates terms. Leading
/// hyphens/periods and trailing hyphens are trimmed; a trailing period is
/// kept only on initials so that `J.-L.` survives as a single term.
pub fn term_vector(text: &str) -> TermVector {
    let mut v = TermVector::default();
    for raw in text.split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '.')) {
        let piece = raw.trim_start_matches(['-', '.']).trim_end_matches('-');
        let piece = if is_initials(piece) {
            piece
        } else {
            piece.trim_end_matches(['.', '-'])
        };
        if !piece.is_empty() {
            v.add(piece.to_lowercase());
        }
    }
    v
}

/// `dot(a, b) / (‖a‖·‖b‖)`, or 0 when either vector is empty.
pub fn cosine_similarity(a: &TermVector, b: &TermVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .map(|(t, c)| f64::from(c) * f64::from(large.get(t)))
        .sum();
    let sq = |v: &TermVector| v.iter().map(|(_, c)| f64::from(c) * f64::from(c)).sum::<f64>();
    (dot / (sq(a) * sq(b)).sqrt()).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(pairs: &[(&str, u32)]) -> TermVector {
        pairs.iter().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    #[test]
    fn case_folding() {
        assert_eq!(term_vector("A a b"), tv(&[("a", 2), ("b", 1)]));
    }

    #[test]
    fn empty_text() {
        assert!(term_vector("").is_empty());
        assert!(term_vector(" , ; ").is_empty());
    }

    #[test]
    fn reference_fragment() {
        assert_eq!(
            term_vector("2018, 20, 5985–5990"),
            tv(&[("2018", 1), ("20", 1), ("5985", 1), ("5990", 1)])
        );
    }

    #[test]
    fn initials_and_hyphens() {
        let v = term_vector("Renaud, J.-L. Well-Defined (19), Org. Lett.");
        assert_eq!(
            v,
            tv(&[("renaud", 1), ("j.-l.", 1), ("well-defined", 1), ("19", 1), ("org", 1), ("lett", 1)])
        );
    }

    #[test]
    fn cosine_examples() {
        let a = term_vector("Organic Letters 2018");
        assert_eq!(cosine_similarity(&a, &a), 1.0);
        assert_eq!(cosine_similarity(&term_vector("x y"), &term_vector("z w")), 0.0);
        let half = cosine_similarity(&tv(&[("a", 1), ("b", 1)]), &tv(&[("a", 1), ("c", 1)]));
        assert_eq!(half, 0.5);
        assert_eq!(cosine_similarity(&a, &TermVector::default()), 0.0);
    }

    #[test]
    fn zero_counts_not_stored() {
        assert!(tv(&[("a", 0)]).is_empty());
    }
}
