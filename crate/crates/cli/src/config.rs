use std::path::{Path, PathBuf};

use afg_core::ingest::TsvLayout;
use afg_core::nn::TrainConfig;
use afg_core::objectives::LossSchedule;
use serde::{Deserialize, Serialize};

use crate::error::{CliResult, Failure};

/// Input files. Relative paths are resolved against the config file's
/// directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Scored-text TSV files used for pre-training.
    pub corpora: Vec<PathBuf>,
    /// Scored-text TSV used for fine-tuning.
    pub finetune_corpus: Option<PathBuf>,
    /// Sentence-labelled abstract corpus.
    pub rct: Option<PathBuf>,
    pub submissions: Option<PathBuf>,
    /// Answer keys; derived from the submissions when absent.
    pub keys: Option<PathBuf>,
    /// Model stem (`<stem>.afgm` + `<stem>.vocab.txt`) fine-tuning starts from.
    pub base_model: Option<PathBuf>,
    /// Regression model stem used to score abstracts.
    pub model: Option<PathBuf>,
    /// Sentence classifier stem.
    pub classifier: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub comments: Option<PathBuf>,
    pub abbreviations: Option<PathBuf>,
    /// JSON map submission id → abstract score in [0, 1], used instead of `model`.
    pub oracle_scores: Option<PathBuf>,
    /// JSON map sentence → label, used instead of `classifier`.
    pub oracle_labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub attention_dim: usize,
    pub max_sequence_length: usize,
    pub max_vocab: usize,
    pub min_frequency: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            embed_dim: 32,
            hidden_dim: 32,
            attention_dim: 32,
            max_sequence_length: 512,
            max_vocab: 2000,
            min_frequency: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub schedule_a: f64,
    pub schedule_b: f64,
    pub schedule_c: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self::with(5, 64, 1e-3)
    }
}

impl TrainSection {
    fn with(epochs: usize, batch_size: usize, learning_rate: f64) -> Self {
        let d = TrainConfig::default();
        let s = LossSchedule::default();
        Self {
            epochs,
            batch_size,
            learning_rate,
            beta1: d.beta1,
            beta2: d.beta2,
            epsilon: d.epsilon,
            schedule_a: s.a,
            schedule_b: s.b,
            schedule_c: s.c,
        }
    }

    pub fn to_train_config(&self, seed: u64) -> CliResult<TrainConfig> {
        let schedule = LossSchedule::new(self.schedule_a, self.schedule_b, self.schedule_c, 1)
            .map_err(|e| Failure::config(anyhow::anyhow!("invalid loss schedule: {e}")))?;
        if self.epochs == 0 || self.batch_size == 0 || self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Failure::config(anyhow::anyhow!(
                "epochs, batch_size and learning_rate must be positive"
            )));
        }
        Ok(TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            schedule,
            seed,
        })
    }
}

/// Epoch, batch and step-size overrides on top of `[train]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, base: &TrainSection) -> TrainSection {
        TrainSection {
            epochs: self.epochs.unwrap_or(base.epochs),
            batch_size: self.batch_size.unwrap_or(base.batch_size),
            learning_rate: self.learning_rate.unwrap_or(base.learning_rate),
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinetuneSection {
    pub eval_fraction: f64,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
}

impl Default for FinetuneSection {
    fn default() -> Self {
        Self {
            eval_fraction: 0.2,
            epochs: Some(20),
            batch_size: Some(16),
            learning_rate: None,
        }
    }
}

impl FinetuneSection {
    pub fn train(&self, base: &TrainSection) -> TrainSection {
        Overrides {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
        }
        .apply(base)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub eval_fraction: f64,
    /// Seeded subsample size of the sentence pool.
    pub max_sentences: Option<usize>,
    /// Train on the 5 corpus labels and map predictions afterwards.
    pub five_class: bool,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        Self {
            eval_fraction: 0.1,
            max_sentences: None,
            five_class: false,
            epochs: None,
            batch_size: None,
            learning_rate: None,
        }
    }
}

impl ClassifierSection {
    pub fn train(&self, base: &TrainSection) -> TrainSection {
        Overrides {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
        }
        .apply(base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Html,
    Markdown,
    Terminal,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub paths: Paths,
    pub tsv: TsvLayout,
    pub model: ModelSection,
    pub train: TrainSection,
    pub finetune: FinetuneSection,
    pub classifier: ClassifierSection,
    pub report: ReportSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(anyhow::anyhow!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Failure::config(anyhow::anyhow!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_relative_to(base);
        Ok(cfg)
    }

    fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        p.corpora.iter_mut().for_each(fix);
        for path in [
            &mut p.finetune_corpus,
            &mut p.rct,
            &mut p.submissions,
            &mut p.keys,
            &mut p.base_model,
            &mut p.model,
            &mut p.classifier,
            &mut p.rules,
            &mut p.comments,
            &mut p.abbreviations,
            &mut p.oracle_scores,
            &mut p.oracle_labels,
            &mut self.out,
        ]
        .into_iter()
        .flatten()
        {
            fix(path);
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("afg-out"))
    }
}

/// Returns the path if it was configured and exists, otherwise a config
/// failure naming it.
pub fn require(path: &Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    let p = path
        .as_ref()
        .ok_or_else(|| Failure::config(anyhow::anyhow!("missing `{what}` in [paths]")))?;
    require_existing(p, what)?;
    Ok(p.clone())
}

pub fn require_existing(p: &Path, what: &str) -> CliResult<()> {
    if p.exists() {
        Ok(())
    } else {
        Err(Failure::config(anyhow::anyhow!("{what} not found: {}", p.display())))
    }
}
