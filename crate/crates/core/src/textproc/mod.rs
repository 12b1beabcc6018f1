//! Sentence segmentation, subword tokenization and bag-of-terms similarity.

mod segment;
mod similarity;
mod vocab;

pub use segment::{segment_sentences, Segmenter, DEFAULT_ABBREVIATIONS};
pub use similarity::{cosine_similarity, term_vector, TermVector};
pub use vocab::{build_vocab, TokenSequence, VocabError, Vocabulary, CONTINUATION, PAD, UNK};
