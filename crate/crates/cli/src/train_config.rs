//! TOML configuration for `fillorder train`.
//!
//! ```toml
//! training_set = "grids/*.mtx"   # glob, relative to this file
//! checkpoint = "model.ckpt"
//! log = "train_log.csv"          # optional
//! stage = "both"                 # spectral | cfp | both
//! epochs = 200
//! lr = 1e-5
//! seed = 7
//! # optional
//! spectral_epochs = 200          # defaults to epochs
//! spectral_lr = 1e-3             # defaults to lr
//! hidden = 16
//! activation = "relu"            # relu | tanh | identity
//! triplets_per_vertex = 10
//! walk_cap = 8
//! retries = 16
//! fir_every = 10
//! joint = false
//! resume = "old.ckpt"
//! ```

use std::path::{Path, PathBuf};

use fillorder::autodiff::Activation;
use fillorder::cfp::{check_learning_rate, CfpTrainConfig, ModelConfig, SamplerConfig};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Spectral,
    Cfp,
    Both,
}

impl Stage {
    pub fn runs_spectral(self) -> bool {
        matches!(self, Stage::Spectral | Stage::Both)
    }

    pub fn runs_cfp(self) -> bool {
        matches!(self, Stage::Cfp | Stage::Both)
    }
}

#[derive(Debug, Default)]
pub struct Overrides {
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub seed: Option<u64>,
    pub stage: Option<Stage>,
    pub checkpoint: Option<PathBuf>,
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    training_set: String,
    checkpoint: PathBuf,
    log: Option<PathBuf>,
    stage: Option<Stage>,
    epochs: Option<usize>,
    lr: Option<f64>,
    seed: Option<u64>,
    spectral_epochs: Option<usize>,
    spectral_lr: Option<f64>,
    hidden: Option<usize>,
    activation: Option<String>,
    triplets_per_vertex: Option<usize>,
    walk_cap: Option<usize>,
    retries: Option<usize>,
    fir_every: Option<usize>,
    joint: Option<bool>,
    resume: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub training_set: String,
    pub checkpoint: PathBuf,
    pub log: Option<PathBuf>,
    pub stage: Stage,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    spectral_epochs: Option<usize>,
    spectral_lr: Option<f64>,
    pub hidden: usize,
    pub activation: Activation,
    pub triplets_per_vertex: usize,
    pub sampler: SamplerConfig,
    pub fir_every: Option<usize>,
    pub joint: bool,
    pub resume: Option<PathBuf>,
}

impl TrainConfig {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        let raw: Raw =
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rel = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let training_set = if Path::new(&raw.training_set).is_absolute() {
            raw.training_set
        } else {
            base.join(&raw.training_set).to_string_lossy().into_owned()
        };
        let activation = match raw.activation.as_deref() {
            Some(a) => a.parse().map_err(|e: fillorder::Error| Failure::Usage(e.to_string()))?,
            None => Activation::default(),
        };
        let defaults = SamplerConfig::default();
        let cfg = TrainConfig {
            training_set,
            checkpoint: overrides.checkpoint.unwrap_or_else(|| rel(raw.checkpoint)),
            log: raw.log.map(rel),
            stage: overrides.stage.or(raw.stage).unwrap_or(Stage::Both),
            epochs: overrides.epochs.or(raw.epochs).unwrap_or(200),
            lr: overrides.lr.or(raw.lr).unwrap_or(fillorder::autodiff::DEFAULT_LEARNING_RATE),
            seed: overrides.seed.or(raw.seed).unwrap_or(0),
            spectral_epochs: raw.spectral_epochs,
            spectral_lr: raw.spectral_lr,
            hidden: raw.hidden.unwrap_or(fillorder::cfp::DEFAULT_HIDDEN),
            activation,
            triplets_per_vertex: raw.triplets_per_vertex.unwrap_or(fillorder::cfp::DEFAULT_TRIPLETS_PER_VERTEX),
            sampler: SamplerConfig {
                walk_cap: raw.walk_cap.unwrap_or(defaults.walk_cap),
                retries: raw.retries.unwrap_or(defaults.retries),
            },
            fir_every: raw.fir_every,
            joint: raw.joint.unwrap_or(false),
            resume: overrides.resume.or(raw.resume.map(rel)),
        };
        check_learning_rate(cfg.lr)?;
        check_learning_rate(cfg.spectral_lr())?;
        if cfg.hidden == 0 {
            return Err(Failure::Usage("hidden must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn spectral_epochs(&self) -> usize {
        self.spectral_epochs.unwrap_or(self.epochs)
    }

    pub fn spectral_lr(&self) -> f64 {
        self.spectral_lr.unwrap_or(self.lr)
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig { hidden: self.hidden, activation: self.activation }
    }

    pub fn cfp_config(&self) -> CfpTrainConfig {
        CfpTrainConfig {
            epochs: self.epochs,
            lr: self.lr,
            triplets_per_vertex: self.triplets_per_vertex,
            sampler: self.sampler,
            fir_every: self.fir_every,
            joint: self.joint,
        }
    }
}
