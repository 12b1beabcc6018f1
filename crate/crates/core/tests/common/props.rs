//! Property checks driven by an explicit [`TestRunner`] so the same
//! suites serve both the `properties` tests and the acceptance run.

use afg_core::ingest::{normalize_scores, split, RawSample};
use afg_core::nn::{encode, init_params, EncoderConfig, Head};
use afg_core::objectives::{mae, max_error, rmse, weight_p, LossSchedule};
use afg_core::structure::{ClassDistribution, Label3};
use afg_core::textproc::{cosine_similarity, term_vector, TokenSequence};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRunner};

pub type Check = fn(u32) -> Result<(), String>;

pub const ALL: [(&str, Check); 7] = [
    ("mae <= rmse <= max_error", metric_ordering),
    ("attention weights sum to 1", attention_normalized),
    ("split partitions its input", split_partition),
    ("normalization is affine and monotone", normalize_affine),
    ("cosine symmetric and scale invariant", cosine_invariances),
    ("loss weight plateau then monotone decay", weight_schedule),
    ("distribution shares sum to 1", distribution_shares),
];

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| match e {
        TestError::Fail(why, value) => format!("{why} for {value:?}"),
        TestError::Abort(why) => format!("aborted: {why}"),
    })
}

fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=64).prop_flat_map(|n| {
        (
            prop::collection::vec(-1e3..1e3f64, n),
            prop::collection::vec(-1e3..1e3f64, n),
        )
    })
}

pub fn metric_ordering(cases: u32) -> Result<(), String> {
    run(cases, pairs(), |(p, t)| {
        let (a, r, m) = (mae(&p, &t).unwrap(), rmse(&p, &t).unwrap(), max_error(&p, &t).unwrap());
        let slack = 1e-12 * m.max(1.0);
        prop_assert!(a <= r + slack, "mae {a} > rmse {r}");
        prop_assert!(r <= m + slack, "rmse {r} > max_error {m}");
        Ok(())
    })
}

pub fn attention_normalized(cases: u32) -> Result<(), String> {
    let strategy = (any::<u64>(), prop::collection::vec(0u32..30, 1..40));
    run(cases, strategy, |(seed, ids)| {
        let cfg = EncoderConfig {
            embed_dim: 6,
            hidden_dim: 5,
            attention_dim: 4,
            seed,
            ..EncoderConfig::new(30, Head::Regression)
        };
        let params = init_params(&cfg).unwrap();
        let seq = TokenSequence {
            spans: (0..ids.len()).map(|i| i..i + 1).collect(),
            ids,
        };
        let alpha = encode(&seq, &params).unwrap().attention;
        prop_assert_eq!(alpha.len(), seq.ids.len());
        prop_assert!(alpha.iter().all(|&a| (0.0..=1.0).contains(&a)));
        let sum: f64 = alpha.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
        Ok(())
    })
}

pub fn split_partition(cases: u32) -> Result<(), String> {
    run(cases, (2usize..300, 0.01..0.99f64, any::<u64>()), |(n, f, seed)| {
        let items: Vec<usize> = (0..n).collect();
        let s = split(&items, f, seed).unwrap();
        prop_assert_eq!(s.train.len(), (f * n as f64).round() as usize);
        let mut all: Vec<usize> = s.train.iter().chain(&s.eval).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, items.clone());
        let again = split(&items, f, seed).unwrap();
        prop_assert_eq!(again.train, s.train);
        Ok(())
    })
}

pub fn normalize_affine(cases: u32) -> Result<(), String> {
    let strategy = (-100.0..100.0f64, 0.5..50.0f64, prop::collection::vec(0.0..1.0f64, 1..30));
    run(cases, strategy, |(min, span, fractions)| {
        let max = min + span;
        let raw: Vec<RawSample> = fractions
            .iter()
            .enumerate()
            .map(|(i, f)| RawSample {
                sample_id: i.to_string(),
                prompt_id: "P".into(),
                text: "x".into(),
                raw_score: min + f * span,
                min_score: min,
                max_score: max,
            })
            .collect();
        let norm = normalize_scores(&raw).unwrap();
        for (r, n) in raw.iter().zip(&norm) {
            let expected = (r.raw_score - min) / span;
            prop_assert!((n.score01 - expected).abs() < 1e-12);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&n.score01));
        }
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                if raw[i].raw_score < raw[j].raw_score {
                    prop_assert!(norm[i].score01 < norm[j].score01);
                }
            }
        }
        Ok(())
    })
}

fn words() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["alpha", "beta", "gamma", "delta", "2018", "J.-L.", "x"]), 1..25)
        .prop_map(|w| w.join(" "))
}

pub fn cosine_invariances(cases: u32) -> Result<(), String> {
    run(cases, (words(), words(), 1u32..20), |(a, b, k)| {
        let (va, vb) = (term_vector(&a), term_vector(&b));
        let ab = cosine_similarity(&va, &vb);
        prop_assert!((ab - cosine_similarity(&vb, &va)).abs() < 1e-12);
        prop_assert!((ab - cosine_similarity(&va.scaled(k), &vb)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        Ok(())
    })
}

pub fn weight_schedule(cases: u32) -> Result<(), String> {
    let strategy = (0.01..=1.0f64, 0.0..=1.0f64, 0.0..50.0f64, 1u64..5000);
    run(cases, strategy, |(a, b, c, total)| {
        let s = LossSchedule::new(a, b, c, total).unwrap();
        let mut prev = f64::INFINITY;
        let steps = total.min(500);
        for i in 0..=steps {
            let t = i * total / steps;
            let w = weight_p(t, &s).unwrap();
            prop_assert!(w > 0.0 && w <= a);
            prop_assert!(w <= prev, "weight rose at t = {t}");
            if (t as f64) / (total as f64) <= b {
                prop_assert_eq!(w, a);
            }
            prev = w;
        }
        Ok(())
    })
}

pub fn distribution_shares(cases: u32) -> Result<(), String> {
    let labels = prop::collection::vec(prop::sample::select(Label3::ALL.to_vec()), 1..60);
    run(cases, labels, |labels| {
        let d = ClassDistribution::from_labels(&labels).unwrap();
        prop_assert!((d.shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(d.counts.iter().sum::<usize>(), labels.len());
        prop_assert_eq!(d.n_classes_present, d.counts.iter().filter(|&&c| c > 0).count());
        Ok(())
    })
}
