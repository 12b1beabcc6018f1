//! Subword vocabulary and greedy longest-match tokenizer.
//!
//! Pieces that start a word are stored bare; pieces inside a word carry the
//! `##` continuation marker. The vocabulary is grown from single characters
//! by repeatedly merging the most frequent adjacent pair of pieces.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const CONTINUATION: &str = "##";

const PAD_ID: u32 = 0;
const UNK_ID: u32 = 1;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("vocabulary file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

/// Token ids plus the byte span of the input each token came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    pub spans: Vec<Range<usize>>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

impl Vocabulary {
    /// Builds a vocabulary from pieces; `[PAD]` and `[UNK]` are prepended
    /// (ids 0 and 1) and duplicates dropped.
    pub fn from_pieces<S: AsRef<str>>(pieces: &[S]) -> Self {
        let mut v = Self {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        v.push(PAD);
        v.push(UNK);
        for p in pieces {
            v.push(p.as_ref());
        }
        v
    }

    fn push(&mut self, token: &str) -> bool {
        if self.index.contains_key(token) {
            return false;
        }
        self.index.insert(token.to_string(), self.tokens.len() as u32);
        self.tokens.push(token.to_string());
        true
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn pad_id(&self) -> u32 {
        PAD_ID
    }

    pub fn unk_id(&self) -> u32 {
        UNK_ID
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// One token per line, line number = id.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for t in &self.tokens {
            writeln!(w, "{t}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, VocabError> {
        let lines = reader.lines().collect::<std::io::Result<Vec<_>>>()?;
        if lines.len() < 2 || lines[0] != PAD || lines[1] != UNK {
            return Err(VocabError::Format(format!(
                "first two lines must be {PAD} and {UNK}"
            )));
        }
        let mut v = Self::from_pieces::<&str>(&[]);
        for (i, line) in lines.iter().enumerate().skip(2) {
            if line.is_empty() || !v.push(line) {
                return Err(VocabError::Format(format!(
                    "line {}: empty or duplicate token `{line}`",
                    i + 1
                )));
            }
        }
        Ok(v)
    }

    /// Greedy longest-prefix tokenization of each whitespace-delimited word.
    ///
    /// Matching is case-insensitive. When no piece matches at some position
    /// the rest of the word becomes one `[UNK]` token, so the spans of a
    /// word always tile it without gaps.
    pub fn tokenize(&self, text: &str) -> TokenSequence {
        let mut seq = TokenSequence {
            ids: Vec::new(),
            spans: Vec::new(),
        };
        for (word_start, word) in words(text) {
            // (byte offset in the original, lowercased form) per char
            let units: Vec<(usize, String)> = word
                .char_indices()
                .map(|(off, c)| (word_start + off, c.to_lowercase().collect()))
                .collect();
            let word_end = word_start + word.len();
            let offset_of = |k: usize| units.get(k).map_or(word_end, |u| u.0);

            let mut start = 0;
            while start < units.len() {
                let mut matched = None;
                let mut candidate = String::new();
                let mut prefixes = Vec::with_capacity(units.len() - start);
                if start > 0 {
                    candidate.push_str(CONTINUATION);
                }
                for u in &units[start..] {
                    candidate.push_str(&u.1);
                    prefixes.push(candidate.clone());
                }
                for (len, piece) in prefixes.iter().enumerate().rev() {
                    if let Some(id) = self.id(piece) {
                        matched = Some((start + len + 1, id));
                        break;
                    }
                }
                match matched {
                    Some((end, id)) => {
                        seq.ids.push(id);
                        seq.spans.push(offset_of(start)..offset_of(end));
                        start = end;
                    }
                    None => {
                        seq.ids.push(UNK_ID);
                        seq.spans.push(offset_of(start)..word_end);
                        break;
                    }
                }
            }
        }
        seq
    }
}

/// Whitespace-delimited words with their byte offsets.
fn words(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split(char::is_whitespace)
        .filter(|w| !w.is_empty())
        .map(move |w| (w.as_ptr() as usize - text.as_ptr() as usize, w))
}

/// Grows a merge-based subword vocabulary from `corpus`.
///
/// Starts from every character (in both word-initial and `##` forms) and
/// then repeatedly adds the merge of the most frequent adjacent pair, ties
/// broken lexicographically, until `max_size` tokens exist or no pair occurs
/// at least `min_frequency` times.
pub fn build_vocab<S: AsRef<str>>(
    corpus: &[S],
    max_size: usize,
    min_frequency: usize,
) -> Result<Vocabulary, VocabError> {
    if corpus.is_empty() {
        return Err(VocabError::Argument("corpus is empty".into()));
    }
    if max_size <= 2 {
        return Err(VocabError::Argument(format!(
            "max_size {max_size} leaves no room beyond the reserved tokens"
        )));
    }

    let mut word_counts: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus {
        for (_, w) in words(doc.as_ref()) {
            *word_counts.entry(w.to_lowercase()).or_insert(0) += 1;
        }
    }

    let mut symbols: Vec<String> = Vec::new();
    let mut symbol_ids: HashMap<String, u32> = HashMap::new();
    let mut intern = |s: String, symbols: &mut Vec<String>| -> u32 {
        *symbol_ids.entry(s.clone()).or_insert_with(|| {
            symbols.push(s);
            (symbols.len() - 1) as u32
        })
    };

    let mut char_freq: BTreeMap<char, usize> = BTreeMap::new();
    let mut split_words: Vec<(Vec<u32>, usize)> = Vec::with_capacity(word_counts.len());
    for (w, &count) in &word_counts {
        let mut pieces = Vec::new();
        for (k, c) in w.chars().enumerate() {
            *char_freq.entry(c).or_insert(0) += count;
            let piece = if k == 0 { c.to_string() } else { format!("{CONTINUATION}{c}") };
            pieces.push(intern(piece, &mut symbols));
        }
        split_words.push((pieces, count));
    }

    let mut chars: Vec<(char, usize)> = char_freq.into_iter().collect();
    chars.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut vocab = Vocabulary::from_pieces::<&str>(&[]);
    'alphabet: for (c, _) in &chars {
        for piece in [c.to_string(), format!("{CONTINUATION}{c}")] {
            if vocab.len() >= max_size {
                break 'alphabet;
            }
            vocab.push(&piece);
        }
    }

    while vocab.len() < max_size {
        let mut pair_counts: HashMap<(u32, u32), usize> = HashMap::new();
        for (pieces, count) in &split_words {
            for w in pieces.windows(2) {
                *pair_counts.entry((w[0], w[1])).or_insert(0) += count;
            }
        }
        let Some(best_count) = pair_counts.values().copied().max() else {
            break;
        };
        if best_count < min_frequency.max(1) {
            break;
        }
        let (left, right) = pair_counts
            .iter()
            .filter(|(_, &c)| c == best_count)
            .map(|(&pair, _)| pair)
            .min_by(|a, b| {
                (symbols[a.0 as usize].as_str(), symbols[a.1 as usize].as_str())
                    .cmp(&(symbols[b.0 as usize].as_str(), symbols[b.1 as usize].as_str()))
            })
            .expect("at least one pair");
        let merged = format!(
            "{}{}",
            symbols[left as usize],
            symbols[right as usize].trim_start_matches(CONTINUATION)
        );
        let merged_id = intern(merged.clone(), &mut symbols);
        for (pieces, _) in &mut split_words {
            let mut k = 0;
            while k + 1 < pieces.len() {
                if pieces[k] == left && pieces[k + 1] == right {
                    pieces[k] = merged_id;
                    pieces.remove(k + 1);
                }
                k += 1;
            }
        }
        vocab.push(&merged);
    }
    Ok(vocab)
}
