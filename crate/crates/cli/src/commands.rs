use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use afg_core::feedback::{render_report, CommentTable, Grader, ReportFormat, RuleSet};
use afg_core::ingest::{
    derive_all_keys, load_answer_keys, load_submissions, normalize_scores, parse_rct, parse_scored_tsv, split,
    AnswerKey, Label5, NormalizedSample, Submission,
};
use afg_core::nn::{
    init_params, load_model, save_model, train, EncoderConfig, Example, Head, ModelParams, Target, TextModel,
    TrainingLog,
};
use afg_core::objectives::{accuracy, confusion, EvalReport};
use afg_core::rng::SplitMix64;
use afg_core::scoring::{abstract_mark, AbstractScorer, FixedScores};
use afg_core::structure::{map_label, FixedLabels, Label3, SentenceClassifier};
use afg_core::textproc::{build_vocab, Segmenter, Vocabulary};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{require, require_existing, OutputFormat, RunConfig, TrainSection};
use crate::error::{CliResult, Failure, OrFail};

/// Independent sub-seeds drawn from the run's root seed.
mod stream {
    pub const INIT: u64 = 1;
    pub const TRAIN: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const SUBSAMPLE: u64 = 4;
}

fn sub_seed(root: u64, stream: u64) -> u64 {
    SplitMix64::derive(root, stream).next_u64()
}

pub struct Context {
    pub config: RunConfig,
    pub json: bool,
    pub color: bool,
}

impl Context {
    fn out_dir(&self) -> CliResult<PathBuf> {
        let dir = self.config.out_dir();
        fs::create_dir_all(&dir).or_other(|| format!("cannot create {}", dir.display()))?;
        Ok(dir)
    }

    fn seed(&self) -> u64 {
        self.config.seed
    }

    fn write_json(&self, path: &Path, value: &impl Serialize) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).or_other(|| "serialization failed".into())?;
        text.push('\n');
        fs::write(path, text).or_other(|| format!("cannot write {}", path.display()))
    }

    fn write_manifest(&self, dir: &Path, command: &str) -> CliResult<()> {
        self.write_json(
            &dir.join("run.json"),
            &json!({ "command": command, "seed": self.seed(), "config": self.config }),
        )
    }

    /// Prints the JSON summary with `--json`, or its lines otherwise.
    fn finish(&self, summary: Value) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&summary).expect("json value"));
        } else if let Value::Object(map) = summary {
            for (k, v) in map {
                println!("{k}: {v}");
            }
        }
    }
}

fn model_paths(stem: &Path) -> (PathBuf, PathBuf) {
    let stem = stem.with_extension("");
    let name = stem.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    (stem.with_file_name(format!("{name}.afgm")), stem.with_file_name(format!("{name}.vocab.txt")))
}

fn save_text_model(params: &ModelParams, vocab: &Vocabulary, stem: &Path) -> CliResult<()> {
    let (weights, vocab_path) = model_paths(stem);
    let f = File::create(&weights).or_other(|| format!("cannot create {}", weights.display()))?;
    save_model(params, BufWriter::new(f)).or_other(|| format!("cannot write {}", weights.display()))?;
    let f = File::create(&vocab_path).or_other(|| format!("cannot create {}", vocab_path.display()))?;
    vocab
        .write_to(BufWriter::new(f))
        .or_other(|| format!("cannot write {}", vocab_path.display()))
}

fn load_text_model(stem: &Path, what: &str) -> CliResult<TextModel> {
    let (weights, vocab_path) = model_paths(stem);
    require_existing(&weights, what)?;
    require_existing(&vocab_path, &format!("{what} vocabulary"))?;
    let f = File::open(&weights).or_data(|| format!("cannot open {}", weights.display()))?;
    let params = load_model(BufReader::new(f)).or_data(|| format!("cannot load {}", weights.display()))?;
    let f = File::open(&vocab_path).or_data(|| format!("cannot open {}", vocab_path.display()))?;
    let vocab = Vocabulary::read_from(BufReader::new(f)).or_data(|| format!("cannot load {}", vocab_path.display()))?;
    TextModel::new(params, vocab).or_data(|| format!("{what} does not match its vocabulary"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let f = File::open(path).or_data(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).or_data(|| format!("cannot parse {}", path.display()))
}

fn read_scored(cfg: &RunConfig, paths: &[PathBuf]) -> CliResult<Vec<NormalizedSample>> {
    let mut raw = Vec::new();
    for p in paths {
        let f = File::open(p).or_data(|| format!("cannot open {}", p.display()))?;
        raw.extend(parse_scored_tsv(BufReader::new(f), &cfg.tsv).or_data(|| format!("cannot parse {}", p.display()))?);
    }
    normalize_scores(&raw).or_data(|| "cannot normalize scores".into())
}

fn encoder_config(cfg: &RunConfig, vocab_size: usize, head: Head) -> EncoderConfig {
    EncoderConfig {
        vocab_size,
        embed_dim: cfg.model.embed_dim,
        hidden_dim: cfg.model.hidden_dim,
        attention_dim: cfg.model.attention_dim,
        head,
        seed: sub_seed(cfg.seed, stream::INIT),
        max_sequence_length: cfg.model.max_sequence_length,
    }
}

fn score_examples(vocab: &Vocabulary, samples: &[NormalizedSample], max_len: usize) -> CliResult<Vec<Example>> {
    samples
        .iter()
        .map(|s| Example::from_text(vocab, &s.text, Target::Score(s.score01), max_len))
        .collect::<Result<_, _>>()
        .or_data(|| "cannot tokenize corpus".into())
}

fn run_training(
    ctx: &Context,
    data: &[Example],
    section: &TrainSection,
    params: ModelParams,
) -> CliResult<(ModelParams, TrainingLog)> {
    let tc = section.to_train_config(sub_seed(ctx.seed(), stream::TRAIN))?;
    train(data, &tc, params).map_err(Failure::training)
}

fn evaluate(model: &TextModel, samples: &[NormalizedSample]) -> CliResult<EvalReport> {
    let preds = samples
        .iter()
        .map(|s| model.predict_score(&s.text))
        .collect::<Result<Vec<_>, _>>()
        .or_other(|| "prediction failed".into())?;
    let targets: Vec<f64> = samples.iter().map(|s| s.score01).collect();
    EvalReport::evaluate(&preds, &targets).or_data(|| "evaluation set too small".into())
}

pub fn pretrain(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    if cfg.paths.corpora.is_empty() {
        return Err(Failure::config(anyhow::anyhow!("missing `corpora` in [paths]")));
    }
    for p in &cfg.paths.corpora {
        require_existing(p, "corpus")?;
    }
    let samples = read_scored(cfg, &cfg.paths.corpora)?;
    let texts: Vec<&str> = samples.iter().map(|s| s.text.as_str()).collect();
    let vocab = build_vocab(&texts, cfg.model.max_vocab, cfg.model.min_frequency).or_data(|| "cannot build vocabulary".into())?;
    let data = score_examples(&vocab, &samples, cfg.model.max_sequence_length)?;
    let params = init_params(&encoder_config(cfg, vocab.len(), Head::Regression)).or_config(|| "invalid model shape".into())?;
    let (params, log) = run_training(ctx, &data, &cfg.train, params)?;

    let dir = ctx.out_dir()?;
    save_text_model(&params, &vocab, &dir.join("pretrained"))?;
    ctx.write_json(&dir.join("pretrain_log.json"), &json!({ "seed": ctx.seed(), "log": log }))?;
    ctx.write_manifest(&dir, "pretrain")?;
    ctx.finish(json!({
        "model": model_paths(&dir.join("pretrained")).0,
        "samples": samples.len(),
        "vocab_size": vocab.len(),
        "steps": log.total_steps,
        "final_loss": log.epoch_losses.last(),
        "seed": ctx.seed(),
    }));
    Ok(())
}

pub fn finetune(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    let base_stem = cfg
        .paths
        .base_model
        .clone()
        .ok_or_else(|| Failure::config(anyhow::anyhow!("missing `base_model` in [paths]")))?;
    let base = load_text_model(&base_stem, "base model")?;
    let corpus = require(&cfg.paths.finetune_corpus, "finetune_corpus")?;
    let samples = read_scored(cfg, &[corpus])?;
    let parts = split(&samples, 1.0 - cfg.finetune.eval_fraction, sub_seed(ctx.seed(), stream::SPLIT))
        .or_config(|| "invalid eval fraction".into())?;
    let max_len = base.params.config().max_sequence_length;
    let data = score_examples(&base.vocab, &parts.train, max_len)?;
    let base_report = evaluate(&base, &parts.eval)?;
    let (params, log) = run_training(ctx, &data, &cfg.finetune.train(&cfg.train), base.params.clone())?;
    let tuned = TextModel::new(params, base.vocab.clone()).or_other(|| "vocabulary mismatch".into())?;
    let tuned_report = evaluate(&tuned, &parts.eval)?;

    let dir = ctx.out_dir()?;
    save_text_model(&tuned.params, &tuned.vocab, &dir.join("finetuned"))?;
    let eval = json!({
        "seed": ctx.seed(),
        "n_train": parts.train.len(),
        "n_eval": parts.eval.len(),
        "base": base_report,
        "finetuned": tuned_report,
    });
    ctx.write_json(&dir.join("finetune_eval.json"), &eval)?;
    ctx.write_json(&dir.join("finetune_log.json"), &json!({ "seed": ctx.seed(), "log": log }))?;
    ctx.write_manifest(&dir, "finetune")?;
    ctx.finish(eval);
    Ok(())
}

pub fn train_classifier(ctx: &Context, five_class: bool) -> CliResult<()> {
    let cfg = &ctx.config;
    let five_class = five_class || cfg.classifier.five_class;
    let rct_path = require(&cfg.paths.rct, "rct")?;
    let f = File::open(&rct_path).or_data(|| format!("cannot open {}", rct_path.display()))?;
    let abstracts = parse_rct(BufReader::new(f)).or_data(|| format!("cannot parse {}", rct_path.display()))?;
    let mut pool: Vec<(Label5, String)> = abstracts.into_iter().flat_map(|a| a.sentences).collect();
    if pool.is_empty() {
        return Err(Failure::data(anyhow::anyhow!("no sentences in {}", rct_path.display())));
    }
    if let Some(max) = cfg.classifier.max_sentences {
        SplitMix64::new(sub_seed(ctx.seed(), stream::SUBSAMPLE)).shuffle(&mut pool);
        pool.truncate(max);
    }
    let parts = split(&pool, 1.0 - cfg.classifier.eval_fraction, sub_seed(ctx.seed(), stream::SPLIT))
        .or_config(|| "invalid eval fraction".into())?;
    if parts.eval.is_empty() {
        return Err(Failure::data(anyhow::anyhow!("evaluation split is empty")));
    }

    let texts: Vec<&str> = parts.train.iter().map(|(_, s)| s.as_str()).collect();
    let vocab = build_vocab(&texts, cfg.model.max_vocab, cfg.model.min_frequency).or_data(|| "cannot build vocabulary".into())?;
    let class_of = |l: Label5| if five_class { l.index() } else { map_label(l).index() };
    let data = parts
        .train
        .iter()
        .map(|(l, s)| Example::from_text(&vocab, s, Target::Class(class_of(*l)), cfg.model.max_sequence_length))
        .collect::<Result<Vec<_>, _>>()
        .or_data(|| "cannot tokenize sentences".into())?;
    let n_classes = if five_class { 5 } else { 3 };
    let params = init_params(&encoder_config(cfg, vocab.len(), Head::Classification { n_classes }))
        .or_config(|| "invalid model shape".into())?;
    let (params, log) = run_training(ctx, &data, &cfg.classifier.train(&cfg.train), params)?;
    let model = TextModel::new(params, vocab).or_other(|| "vocabulary mismatch".into())?;

    let mut pred = Vec::with_capacity(parts.eval.len());
    for (_, s) in &parts.eval {
        let p = model.classify(s).or_other(|| "classification failed".into())?;
        pred.push((0..3).fold(0, |b, i| if p[i] > p[b] { i } else { b }));
    }
    let truth: Vec<usize> = parts.eval.iter().map(|(l, _)| map_label(*l).index()).collect();
    let mut counts = [0usize; 3];
    for &t in &truth {
        counts[t] += 1;
    }
    let baseline = *counts.iter().max().expect("three classes") as f64 / truth.len() as f64;
    let acc = accuracy(&pred, &truth, 3).or_other(|| "accuracy".into())?;
    let matrix = confusion(&pred, &truth, 3)
        .or_other(|| "confusion".into())?
        .with_labels(&Label3::ALL.map(|l| l.as_str()));

    let dir = ctx.out_dir()?;
    save_text_model(&model.params, &model.vocab, &dir.join("classifier"))?;
    let report = json!({
        "seed": ctx.seed(),
        "five_class_training": five_class,
        "n_train": parts.train.len(),
        "n_eval": parts.eval.len(),
        "accuracy": acc,
        "majority_baseline": baseline,
        "confusion": matrix,
    });
    ctx.write_json(&dir.join("classifier_eval.json"), &report)?;
    ctx.write_json(&dir.join("classifier_log.json"), &json!({ "seed": ctx.seed(), "log": log }))?;
    ctx.write_manifest(&dir, "train-classifier")?;
    ctx.finish(json!({ "accuracy": acc, "majority_baseline": baseline, "n_eval": parts.eval.len(), "seed": ctx.seed() }));
    Ok(())
}

fn load_submissions_from(cfg: &RunConfig) -> CliResult<Vec<Submission>> {
    let path = require(&cfg.paths.submissions, "submissions")?;
    let f = File::open(&path).or_data(|| format!("cannot open {}", path.display()))?;
    let subs = load_submissions(BufReader::new(f)).or_data(|| format!("cannot load {}", path.display()))?;
    if subs.is_empty() {
        return Err(Failure::data(anyhow::anyhow!("no submissions in {}", path.display())));
    }
    Ok(subs)
}

fn scorer(cfg: &RunConfig) -> CliResult<Box<dyn AbstractScorer>> {
    if let Some(p) = &cfg.paths.oracle_scores {
        require_existing(p, "oracle_scores")?;
        let scores: FixedScores = read_json(p)?;
        return Ok(Box::new(scores));
    }
    let stem = cfg
        .paths
        .model
        .as_ref()
        .ok_or_else(|| Failure::config(anyhow::anyhow!("set `model` or `oracle_scores` in [paths]")))?;
    Ok(Box::new(load_text_model(stem, "model")?))
}

fn classifier(cfg: &RunConfig) -> CliResult<Box<dyn SentenceClassifier>> {
    if let Some(p) = &cfg.paths.oracle_labels {
        require_existing(p, "oracle_labels")?;
        let labels: FixedLabels = read_json(p)?;
        return Ok(Box::new(FixedLabels(labels.0.into_iter().map(|(k, v)| (k.trim().to_string(), v)).collect())));
    }
    let stem = cfg
        .paths
        .classifier
        .as_ref()
        .ok_or_else(|| Failure::config(anyhow::anyhow!("set `classifier` or `oracle_labels` in [paths]")))?;
    Ok(Box::new(load_text_model(stem, "classifier")?))
}

fn answer_keys(cfg: &RunConfig, subs: &[Submission]) -> CliResult<Vec<AnswerKey>> {
    if let Some(p) = &cfg.paths.keys {
        require_existing(p, "keys")?;
        let f = File::open(p).or_data(|| format!("cannot open {}", p.display()))?;
        return load_answer_keys(BufReader::new(f)).or_data(|| format!("cannot load {}", p.display()));
    }
    let derived = derive_all_keys(subs).or_data(|| "cannot derive answer keys".into())?;
    Ok(derived
        .into_iter()
        .map(|d| {
            for w in &d.warnings {
                log::warn!("{w}");
            }
            d.key
        })
        .collect())
}

fn file_stem_for(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

pub fn grade(ctx: &Context, format: Option<OutputFormat>) -> CliResult<()> {
    let cfg = &ctx.config;
    let subs = load_submissions_from(cfg)?;
    let keys = answer_keys(cfg, &subs)?;
    let scorer = scorer(cfg)?;
    let classifier = classifier(cfg)?;
    let rules = match &cfg.paths.rules {
        Some(p) => {
            require_existing(p, "rules")?;
            let text = fs::read_to_string(p).or_config(|| format!("cannot read {}", p.display()))?;
            RuleSet::from_json(&text).or_config(|| format!("invalid rules {}", p.display()))?
        }
        None => RuleSet::default(),
    };
    let comments = match &cfg.paths.comments {
        Some(p) => {
            require_existing(p, "comments")?;
            let text = fs::read_to_string(p).or_config(|| format!("cannot read {}", p.display()))?;
            CommentTable::from_json(&text).or_config(|| format!("invalid comments {}", p.display()))?
        }
        None => CommentTable::default(),
    };
    let segmenter = match &cfg.paths.abbreviations {
        Some(p) => {
            require_existing(p, "abbreviations")?;
            let f = File::open(p).or_config(|| format!("cannot open {}", p.display()))?;
            Segmenter::from_reader(BufReader::new(f)).or_config(|| format!("cannot read {}", p.display()))?
        }
        None => Segmenter::default(),
    };
    let grader = Grader {
        scorer: scorer.as_ref(),
        classifier: classifier.as_ref(),
        segmenter: &segmenter,
        rules: &rules,
        comments: &comments,
    };
    let reports = grader.reports(&subs, &keys).or_data(|| "grading failed".into())?;

    let format = format.unwrap_or(cfg.report.format);
    let (render_format, ext) = match format {
        OutputFormat::Html => (ReportFormat::Html, "html"),
        OutputFormat::Markdown => (ReportFormat::Markdown, "md"),
        OutputFormat::Terminal => (ReportFormat::Terminal { color: false }, "txt"),
    };
    let dir = ctx.out_dir()?;
    let report_dir = dir.join("reports");
    fs::create_dir_all(&report_dir).or_other(|| format!("cannot create {}", report_dir.display()))?;
    for r in &reports {
        let path = report_dir.join(format!("{}.{ext}", file_stem_for(&r.submission_id)));
        fs::write(&path, render_report(r, render_format)).or_other(|| format!("cannot write {}", path.display()))?;
    }
    let marks: Vec<_> = reports.iter().map(|r| &r.marks).collect();
    ctx.write_json(&dir.join("marks.json"), &marks)?;
    ctx.write_json(&dir.join("reports.json"), &reports)?;
    ctx.write_manifest(&dir, "grade")?;

    if ctx.json {
        println!("{}", serde_json::to_string_pretty(&marks).expect("marks serialize"));
    } else {
        for r in &reports {
            print!("{}", render_report(r, ReportFormat::Terminal { color: ctx.color }));
            println!();
        }
    }
    Ok(())
}

pub fn eval(ctx: &Context, model: Option<PathBuf>) -> CliResult<()> {
    let mut cfg = ctx.config.clone();
    if let Some(m) = model {
        cfg.paths.model = Some(m);
        cfg.paths.oracle_scores = None;
    }
    let subs = load_submissions_from(&cfg)?;
    let scorer = scorer(&cfg)?;
    let mut machine = Vec::new();
    let mut human = Vec::new();
    for s in &subs {
        let Some(h) = &s.human_marks else { continue };
        let score = scorer.score(s).or_data(|| format!("cannot score {}", s.submission_id))?;
        machine.push(abstract_mark(score).or_data(|| format!("bad score for {}", s.submission_id))? as usize);
        human.push(h.abstract_mark as usize);
    }
    if machine.len() < 2 {
        return Err(Failure::data(anyhow::anyhow!(
            "need at least two submissions with human marks, found {}",
            machine.len()
        )));
    }
    let labels: Vec<String> = (0..=6).map(|m| m.to_string()).collect();
    let matrix = confusion(&machine, &human, 7).or_data(|| "confusion".into())?.with_labels(&labels);
    let as_f64 = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let report = EvalReport::evaluate(&as_f64(&machine), &as_f64(&human)).or_data(|| "evaluation".into())?;
    let result = json!({
        "seed": ctx.seed(),
        "n": machine.len(),
        "exact_agreement": matrix.accuracy(),
        "abstract_marks": report,
        "confusion": matrix,
    });
    let dir = ctx.out_dir()?;
    ctx.write_json(&dir.join("eval.json"), &result)?;
    ctx.write_manifest(&dir, "eval")?;
    ctx.finish(result);
    Ok(())
}
