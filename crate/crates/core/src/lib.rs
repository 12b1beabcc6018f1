//! Grading and feedback pipeline for literature-abstracting assignments.
//!
//! * [`ingest`] reads corpora, submissions and answer keys.
//! * [`textproc`] segments sentences, tokenizes into subword pieces and
//!   compares bags of terms.
//! * [`nn`] is the trainable encoder (bidirectional LSTM with additive
//!   attention) with a regression head for abstract scores and a
//!   classification head for sentence roles.
//! * [`objectives`] holds the losses and evaluation metrics.
//! * [`scoring`] applies the mark scheme.
//! * [`structure`] labels abstract sentences and summarizes their roles.
//! * [`feedback`] turns marks and structure into comments and reports.

pub mod feedback;
pub mod ingest;
pub mod nn;
pub mod objectives;
pub mod rng;
pub mod scoring;
pub mod structure;
pub mod synth;
pub mod textproc;
