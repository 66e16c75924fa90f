use std::path::Path;

use anyhow::Context;
use serde::Deserialize;
use stance_core::classifiers::{ModelKind, TrainConfig};
use stance_core::embeddings::DEFAULT_MAX_LEN;
use stance_core::synthetic::SyntheticConfig;

/// Settings read from `--config`. Every key is optional.
///
/// ```toml
/// max_len = 50
/// target_precision = 0.8
/// k = 10
///
/// [cnn]
/// learning_rate = 0.01
/// epochs = 30
///
/// [synthetic]
/// labeled = 1500
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub max_len: Option<usize>,
    pub target_precision: Option<f64>,
    pub k: Option<usize>,
    pub logreg: TrainOverrides,
    pub cnn: TrainOverrides,
    pub synthetic: SyntheticConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOverrides {
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub l2: Option<f64>,
}

impl TrainOverrides {
    fn apply(&self, base: TrainConfig) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate.unwrap_or(base.learning_rate),
            epochs: self.epochs.unwrap_or(base.epochs),
            batch_size: self.batch_size.unwrap_or(base.batch_size),
            l2: self.l2.unwrap_or(base.l2),
            seed: base.seed,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Config = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(t) = cfg.target_precision {
            anyhow::ensure!(t > 0.0 && t <= 1.0, "target_precision must be in (0, 1], got {t}");
        }
        for (name, o) in [("logreg", &cfg.logreg), ("cnn", &cfg.cnn)] {
            if let Some(lr) = o.learning_rate {
                anyhow::ensure!(lr > 0.0, "{name}.learning_rate must be positive");
            }
            anyhow::ensure!(o.batch_size != Some(0), "{name}.batch_size must be positive");
        }
        Ok(cfg)
    }

    pub fn max_len(&self) -> usize {
        self.max_len.unwrap_or(DEFAULT_MAX_LEN)
    }

    pub fn target_precision(&self) -> f64 {
        self.target_precision.unwrap_or(0.8)
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(10)
    }

    pub fn train(&self, kind: ModelKind, seed: u64) -> TrainConfig {
        let cfg = match kind {
            ModelKind::LogReg => self.logreg.apply(TrainConfig::logreg()),
            ModelKind::Cnn => self.cnn.apply(TrainConfig::cnn()),
            _ => TrainConfig::default(),
        };
        cfg.with_seed(seed)
    }
}
