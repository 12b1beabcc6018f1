//! Seeded synthetic corpora standing in for data that cannot be shipped:
//! a sentence-labelled abstract corpus and two related families of scored
//! texts.

use crate::ingest::{Label5, RawSample, RctAbstract, TsvLayout};
use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::rng::SplitMix64;

const DRUGS: &[&str] = &[
    "metformin", "aspirin", "vitamin d", "exercise therapy", "acupuncture", "insulin glargine",
    "cognitive therapy", "statins", "probiotics", "zinc supplements", "ketamine", "melatonin",
];
const CONDITIONS: &[&str] = &[
    "type 2 diabetes", "hypertension", "chronic pain", "major depression", "asthma", "heart failure",
    "obesity", "insomnia", "knee osteoarthritis", "migraine", "sepsis", "stroke",
];
const POPULATIONS: &[&str] = &[
    "adults", "children", "older patients", "pregnant women", "outpatients", "veterans",
    "adolescents", "nursing home residents",
];
const OUTCOMES: &[&str] = &[
    "mortality", "hospital admission", "pain intensity", "blood pressure", "quality of life",
    "symptom severity", "weight loss", "relapse", "functional recovery", "sleep duration",
];
const DURATIONS: &[&str] = &["6 weeks", "12 weeks", "3 months", "6 months", "one year", "two years"];

const BACKGROUND: &[&str] = &[
    "{condition} is a leading cause of {outcome} among {population}.",
    "Little is known about the effect of {drug} on {outcome}.",
    "{condition} affects millions of {population} worldwide.",
    "Previous studies of {drug} have reported conflicting findings.",
    "The burden of {condition} continues to rise in many countries.",
    "Current treatments for {condition} are often poorly tolerated.",
];
const OBJECTIVE: &[&str] = &[
    "We aimed to assess whether {drug} reduces {outcome} in {population} with {condition}.",
    "The purpose of this study was to evaluate {drug} for {condition}.",
    "This trial investigated the efficacy of {drug} in {population}.",
    "Our objective was to compare {drug} with usual care for {condition}.",
];
const METHOD: &[&str] = &[
    "{n} {population} with {condition} were randomly assigned to {drug} or placebo.",
    "Participants received {drug} daily for {duration}.",
    "The primary outcome was {outcome} at {duration}.",
    "We conducted a double-blind randomized controlled trial at {small} centres.",
    "Data were analysed with mixed-effects regression models.",
    "Randomization was stratified by site and baseline {outcome}.",
    "Outcomes were assessed by investigators blinded to allocation.",
];
const RESULT: &[&str] = &[
    "{outcome} decreased by {pct}% in the {drug} group compared with placebo (p = 0.0{small}).",
    "A total of {n} {population} completed the study.",
    "Adverse events occurred in {pct}% of patients receiving {drug}.",
    "There was no significant difference in {outcome} between groups (p = 0.{small}).",
    "The mean {outcome} score improved from {small}.{small} to {small}.{small}.",
    "The hazard ratio for {outcome} was 0.{small} (95% ci 0.{small} to 0.9).",
];
const CONCLUSION: &[&str] = &[
    "{drug} reduced {outcome} in {population} with {condition}.",
    "These findings suggest that {drug} may be a safe option for {condition}.",
    "Further trials are needed to confirm these results.",
    "{drug} should be considered for {population} with {condition}.",
    "In conclusion, {drug} did not improve {outcome}.",
];

fn frames(label: Label5) -> &'static [&'static str] {
    match label {
        Label5::Background => BACKGROUND,
        Label5::Objective => OBJECTIVE,
        Label5::Method => METHOD,
        Label5::Result => RESULT,
        Label5::Conclusion => CONCLUSION,
    }
}

fn fill(frame: &str, rng: &mut SplitMix64) -> String {
    let mut out = String::new();
    let mut rest = frame;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let end = start + rest[start..].find('}').expect("closed slot");
        let value = match &rest[start + 1..end] {
            "drug" => rng.choose(DRUGS).to_string(),
            "condition" => rng.choose(CONDITIONS).to_string(),
            "population" => rng.choose(POPULATIONS).to_string(),
            "outcome" => rng.choose(OUTCOMES).to_string(),
            "duration" => rng.choose(DURATIONS).to_string(),
            "n" => (20 + rng.below(980)).to_string(),
            "pct" => (1 + rng.below(60)).to_string(),
            "small" => (1 + rng.below(9)).to_string(),
            other => panic!("unknown slot {other}"),
        };
        out.push_str(&value);
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    let mut chars = out.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => out,
    }
}

/// Generates abstracts with sections in the usual order. With probability
/// `label_noise` a sentence is drawn from a different label's frames while
/// keeping its position's label.
pub fn rct_corpus(n_abstracts: usize, label_noise: f64, seed: u64) -> Vec<RctAbstract> {
    let mut rng = SplitMix64::new(seed);
    let sections = [
        (Label5::Background, 1, 2),
        (Label5::Objective, 1, 1),
        (Label5::Method, 2, 4),
        (Label5::Result, 3, 5),
        (Label5::Conclusion, 1, 2),
    ];
    (0..n_abstracts)
        .map(|i| {
            let mut sentences = Vec::new();
            for &(label, lo, hi) in &sections {
                let count = lo + rng.below(hi - lo + 1);
                for _ in 0..count {
                    let source = if rng.bernoulli(label_noise) {
                        *rng.choose(&Label5::ALL)
                    } else {
                        label
                    };
                    let frame = rng.choose(frames(source));
                    sentences.push((label, fill(frame, &mut rng)));
                }
            }
            RctAbstract {
                abstract_id: format!("{}", 10_000_000 + i),
                sentences,
            }
        })
        .collect()
}

/// Two prompt families over a shared word list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Score is the share of favourable words among evaluative words;
    /// raw marks 0–12.
    A,
    /// 0.7 × the family-A signal plus 0.3 × the share of topic key words
    /// among the topic slots; raw marks 1–6.
    B,
}

impl Family {
    pub fn prompt_id(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
        }
    }

    pub fn range(self) -> (f64, f64) {
        match self {
            Family::A => (0.0, 12.0),
            Family::B => (1.0, 6.0),
        }
    }
}

const LEXICON_SIZE: usize = 150;

/// Pronounceable three-syllable pseudo-words, fixed across seeds. The first
/// `LEXICON_SIZE` are favourable, the next `LEXICON_SIZE` unfavourable.
fn lexicon() -> &'static [String] {
    static WORDS: OnceLock<Vec<String>> = OnceLock::new();
    WORDS.get_or_init(|| {
        const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh"];
        const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
        let mut rng = SplitMix64::new(0x001E_71C0);
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        while out.len() < 2 * LEXICON_SIZE {
            let w: String = (0..3).map(|_| format!("{}{}", rng.choose(ONSETS), rng.choose(VOWELS))).collect();
            if seen.insert(w.clone()) {
                out.push(w);
            }
        }
        out
    })
}

/// Neutral in family A; the first half are the family-B key words.
const TOPIC: &[&str] = &[
    "catalyst", "yield", "ligand", "solvent", "reaction", "selectivity", "mechanism", "substrate",
    "oxidant", "pressure", "student", "summary", "paper", "author", "journal", "section",
];
const FILLER: &[&str] = &[
    "the", "a", "of", "and", "this", "with", "is", "was", "in", "it", "on", "for", "very", "quite",
];

/// Draws `n` scored texts of one family.
pub fn scored_corpus(family: Family, n: usize, seed: u64) -> Vec<RawSample> {
    let mut rng = SplitMix64::derive(seed, family as u64 + 1);
    let (min, max) = family.range();
    (0..n)
        .map(|i| {
            let favour = rng.next_f64();
            let key_share = rng.next_f64();
            let n_eval = 8 + rng.below(8);
            let n_topic = 8 + rng.below(5);
            let lex = lexicon();
            let mut words: Vec<&str> = Vec::new();
            let mut good = 0;
            for _ in 0..n_eval {
                if rng.bernoulli(favour) {
                    good += 1;
                    words.push(&lex[rng.below(LEXICON_SIZE)]);
                } else {
                    words.push(&lex[LEXICON_SIZE + rng.below(LEXICON_SIZE)]);
                }
            }
            let mut keys = 0;
            for _ in 0..n_topic {
                if rng.bernoulli(key_share) {
                    keys += 1;
                    words.push(rng.choose(&TOPIC[..8]));
                } else {
                    words.push(rng.choose(&TOPIC[8..]));
                }
            }
            for _ in 0..10 + rng.below(10) {
                words.push(rng.choose(FILLER));
            }
            rng.shuffle(&mut words);
            let a = good as f64 / n_eval as f64;
            let score01 = match family {
                Family::A => a,
                Family::B => 0.7 * a + 0.3 * keys as f64 / n_topic as f64,
            };
            RawSample {
                sample_id: format!("{}{i:05}", family.prompt_id()),
                prompt_id: family.prompt_id().into(),
                text: words.join(" "),
                raw_score: (min + score01 * (max - min)).round(),
                min_score: min,
                max_score: max,
            }
        })
        .collect()
}

/// Writes samples in the default TSV layout (`id`, `set`, `essay`, `score`).
pub fn to_tsv(samples: &[RawSample]) -> String {
    let mut s = String::from("id\tset\tessay\tscore\n");
    for x in samples {
        s.push_str(&format!("{}\t{}\t{}\t{}\n", x.sample_id, x.prompt_id, x.text, x.raw_score));
    }
    s
}

/// Default TSV layout with the ranges of both families registered.
pub fn tsv_layout() -> TsvLayout {
    [Family::A, Family::B]
        .into_iter()
        .fold(TsvLayout::default(), |l, f| {
            let (min, max) = f.range();
            l.with_range(f.prompt_id(), min, max)
        })
}
