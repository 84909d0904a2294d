//! Experiment configuration as line-oriented `section.key=value` text.
//!
//! Blank lines and lines starting with `#` are ignored. Every key has a
//! default, so a file only needs the values it changes.

use crate::features::FeatureConfig;
use crate::network::{plan_windows, Architecture, Pooling, Transfer};
use crate::training::{TrainConfig, Voting, XvalConfig};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: expected key=value, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("bad value '{value}' for key '{key}': {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("cannot read config {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub features: FeatureConfig,
    pub order: usize,
    pub layers: usize,
    pub surviving: usize,
    /// Frames between segment starts; 0 means one segment length.
    pub segment_hop: usize,
    pub width: usize,
    pub bandwidth: usize,
    pub overlap: i64,
    /// false builds plain CLNN layers.
    pub masked: bool,
    pub transfer: Transfer,
    pub pooling: Pooling,
    pub dense: Vec<usize>,
    pub dense_transfer: Transfer,
    pub class_count: usize,
    pub train: TrainConfig,
    pub folds: usize,
    pub voting: Voting,
    pub manifest: String,
    pub features_dir: String,
    pub out_dir: String,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            order: 20,
            layers: 1,
            surviving: 56,
            segment_hop: 0,
            width: 220,
            bandwidth: 40,
            overlap: -10,
            masked: true,
            transfer: Transfer::Sigmoid,
            pooling: Pooling::Mean,
            dense: vec![50, 10],
            dense_transfer: Transfer::Sigmoid,
            class_count: 8,
            train: TrainConfig::default(),
            folds: 10,
            voting: Voting::Mean,
            manifest: String::new(),
            features_dir: String::new(),
            out_dir: String::new(),
            seed: 42,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    let value = value.trim();
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v)).collect()
}

impl ExperimentConfig {
    /// Every key and its current value, in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = &self.features;
        let t = &self.train;
        vec![
            ("features.rate", f.sample_rate.to_string()),
            ("features.fft", f.fft_size.to_string()),
            ("features.hop", f.hop.to_string()),
            ("features.mels", f.n_mels.to_string()),
            ("features.fmin", format!("{:?}", f.fmin)),
            ("features.fmax", format!("{:?}", f.fmax)),
            ("features.log_base", format!("{:?}", f.log_base)),
            ("features.log_floor", format!("{:?}", f.log_floor)),
            ("plan.n", self.order.to_string()),
            ("plan.m", self.layers.to_string()),
            ("plan.k", self.surviving.to_string()),
            ("plan.segment_hop", self.segment_hop.to_string()),
            ("arch.e", self.width.to_string()),
            ("arch.bw", self.bandwidth.to_string()),
            ("arch.ov", self.overlap.to_string()),
            ("arch.masked", self.masked.to_string()),
            ("arch.f", self.transfer.to_string()),
            ("arch.pooling", self.pooling.to_string()),
            (
                "arch.dense",
                self.dense.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("arch.dense_f", self.dense_transfer.to_string()),
            ("arch.class_count", self.class_count.to_string()),
            ("train.batch_size", t.batch_size.to_string()),
            ("train.max_epochs", t.max_epochs.to_string()),
            ("train.patience", t.patience.to_string()),
            ("train.dropout", format!("{:?}", t.dropout)),
            ("train.alpha", format!("{:?}", t.adam.alpha)),
            ("train.beta1", format!("{:?}", t.adam.beta1)),
            ("train.beta2", format!("{:?}", t.adam.beta2)),
            ("train.epsilon", format!("{:?}", t.adam.epsilon)),
            ("train.folds", self.folds.to_string()),
            ("train.voting", self.voting.to_string()),
            ("paths.manifest", self.manifest.clone()),
            ("paths.features_dir", self.features_dir.clone()),
            ("paths.out_dir", self.out_dir.clone()),
            ("seed", self.seed.to_string()),
        ]
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value;
        match key {
            "features.rate" => self.features.sample_rate = parse(key, v)?,
            "features.fft" => self.features.fft_size = parse(key, v)?,
            "features.hop" => self.features.hop = parse(key, v)?,
            "features.mels" => self.features.n_mels = parse(key, v)?,
            "features.fmin" => self.features.fmin = parse(key, v)?,
            "features.fmax" => self.features.fmax = parse(key, v)?,
            "features.log_base" => self.features.log_base = parse(key, v)?,
            "features.log_floor" => self.features.log_floor = parse(key, v)?,
            "plan.n" => self.order = parse(key, v)?,
            "plan.m" => self.layers = parse(key, v)?,
            "plan.k" => self.surviving = parse(key, v)?,
            "plan.segment_hop" => self.segment_hop = parse(key, v)?,
            "arch.e" => self.width = parse(key, v)?,
            "arch.bw" => self.bandwidth = parse(key, v)?,
            "arch.ov" => self.overlap = parse(key, v)?,
            "arch.masked" => self.masked = parse(key, v)?,
            "arch.f" => self.transfer = parse(key, v)?,
            "arch.pooling" => self.pooling = parse(key, v)?,
            "arch.dense" => self.dense = parse_list(key, v)?,
            "arch.dense_f" => self.dense_transfer = parse(key, v)?,
            "arch.class_count" => self.class_count = parse(key, v)?,
            "train.batch_size" => self.train.batch_size = parse(key, v)?,
            "train.max_epochs" => self.train.max_epochs = parse(key, v)?,
            "train.patience" => self.train.patience = parse(key, v)?,
            "train.dropout" => self.train.dropout = parse(key, v)?,
            "train.alpha" => self.train.adam.alpha = parse(key, v)?,
            "train.beta1" => self.train.adam.beta1 = parse(key, v)?,
            "train.beta2" => self.train.adam.beta2 = parse(key, v)?,
            "train.epsilon" => self.train.adam.epsilon = parse(key, v)?,
            "train.folds" => self.folds = parse(key, v)?,
            "train.voting" => self.voting = parse(key, v)?,
            "paths.manifest" => self.manifest = v.trim().to_string(),
            "paths.features_dir" => self.features_dir = v.trim().to_string(),
            "paths.out_dir" => self.out_dir = v.trim().to_string(),
            "seed" => self.seed = parse(key, v)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Applies `text` on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    /// Applies `text` on top of the current values.
    pub fn apply(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: line.to_string(),
                });
            };
            self.set(key.trim(), value).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line: i + 1, key },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            feature_len: self.features.n_mels,
            order: self.order,
            layers: self.layers,
            surviving: self.surviving,
            width: self.width,
            mask: self.masked.then_some((self.bandwidth, self.overlap)),
            transfer: self.transfer,
            pooling: self.pooling,
            dense: self.dense.clone(),
            dense_transfer: self.dense_transfer,
            class_count: self.class_count,
        }
    }

    pub fn segment_len(&self) -> Result<usize, ConfigError> {
        plan_windows(self.order, self.layers, self.surviving)
            .map(|p| p.segment)
            .map_err(|e| ConfigError::BadValue {
                key: "plan.n".into(),
                value: self.order.to_string(),
                reason: e.to_string(),
            })
    }

    pub fn effective_segment_hop(&self) -> Result<usize, ConfigError> {
        if self.segment_hop == 0 {
            self.segment_len()
        } else {
            Ok(self.segment_hop)
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    pub fn xval_config(&self, threads: usize) -> Result<XvalConfig, ConfigError> {
        Ok(XvalConfig {
            arch: self.architecture(),
            segment_hop: self.effective_segment_hop()?,
            train: self.train_config(),
            folds: self.folds,
            voting: self.voting,
            seed: self.seed,
            threads,
        })
    }
}
