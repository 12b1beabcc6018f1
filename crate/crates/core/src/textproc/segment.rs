use std::io::BufRead;

pub const DEFAULT_ABBREVIATIONS: [&str; 6] = ["e.g.", "i.e.", "et al.", "Fig.", "vs.", "Dr."];

/// Rule-based sentence splitter.
///
/// A sentence ends at `.`, `!` or `?` when the next character is whitespace
/// and the next non-whitespace character is an uppercase letter or a digit.
/// No split happens inside brackets or right after a listed abbreviation.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: Vec<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Self::new(DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()))
    }
}

impl Segmenter {
    pub fn new(abbreviations: impl IntoIterator<Item = String>) -> Self {
        Self {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.trim().to_string())
                .filter(|a| !a.is_empty())
                .collect(),
        }
    }

    /// One abbreviation per line; blank lines are ignored.
    pub fn from_reader<R: BufRead>(reader: R) -> std::io::Result<Self> {
        let lines = reader.lines().collect::<std::io::Result<Vec<_>>>()?;
        Ok(Self::new(lines))
    }

    pub fn abbreviations(&self) -> &[String] {
        &self.abbreviations
    }

    fn ends_with_abbreviation(&self, prefix: &str) -> bool {
        self.abbreviations.iter().any(|abbr| {
            prefix.strip_suffix(abbr.as_str()).is_some_and(|before| {
                before
                    .chars()
                    .next_back()
                    .is_none_or(|c| c.is_whitespace() || c == '(' || c == '[')
            })
        })
    }

    pub fn segment(&self, text: &str) -> Vec<String> {
        let mut sentences = Vec::new();
        let mut start = 0;
        let mut depth = 0usize;
        let chars: Vec<(usize, char)> = text.char_indices().collect();

        for (k, &(i, c)) in chars.iter().enumerate() {
            match c {
                '(' | '[' => depth += 1,
                ')' | ']' => depth = depth.saturating_sub(1),
                '.' | '!' | '?' if depth == 0 => {
                    let end = i + c.len_utf8();
                    let followed_by_space = chars.get(k + 1).is_some_and(|(_, n)| n.is_whitespace());
                    if !followed_by_space {
                        continue;
                    }
                    let next = chars[k + 1..].iter().map(|(_, n)| *n).find(|n| !n.is_whitespace());
                    if !next.is_some_and(|n| n.is_uppercase() || n.is_ascii_digit()) {
                        continue;
                    }
                    if c == '.' && self.ends_with_abbreviation(&text[start..end]) {
                        continue;
                    }
                    let sentence = text[start..end].trim();
                    if !sentence.is_empty() {
                        sentences.push(sentence.to_string());
                    }
                    start = end;
                }
                _ => {}
            }
        }
        let tail = text[start..].trim();
        if !tail.is_empty() {
            sentences.push(tail.to_string());
        }
        sentences
    }
}

/// Segments with the default abbreviation list.
pub fn segment_sentences(text: &str) -> Vec<String> {
    Segmenter::default().segment(text)
}
