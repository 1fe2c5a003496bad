use std::fmt;
use std::str::FromStr;

use crate::model::{Arch, ConfigError, ModelConfig};

/// Learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheduler {
    Constant,
    /// Multiply by `factor` after `patience` epochs without a dev improvement.
    Plateau { factor: f64, patience: usize, min_lr: f64 },
    WarmupInvSqrt { warmup_samples: u64 },
}

/// The two hyperparameter settings: 100 training samples, and everything
/// larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Small100,
    Standard,
}

impl Regime {
    pub fn for_limit(limit: Option<usize>) -> Self {
        match limit {
            Some(n) if n <= 100 => Regime::Small100,
            _ => Regime::Standard,
        }
    }

    pub fn model_config(self, arch: Arch) -> ModelConfig {
        let base = match arch {
            Arch::PointerGenerator => ModelConfig::pointer_generator,
            Arch::AttentiveLstm => ModelConfig::attentive_lstm,
        };
        match self {
            Regime::Small100 => ModelConfig {
                enc_layers: 2,
                dec_layers: 2,
                dropout: 0.3662,
                ..base(512, 1024)
            },
            Regime::Standard => ModelConfig {
                dropout: 0.2212,
                ..base(1024, 2048)
            },
        }
    }

    pub fn train_config(self, seed: u64) -> TrainConfig {
        match self {
            Regime::Small100 => TrainConfig {
                batch_size: 16,
                max_epochs: 607,
                lr: 2.411e-4,
                beta1: 0.8716,
                beta2: 0.9848,
                scheduler: Scheduler::Plateau {
                    factor: 0.686,
                    patience: 30,
                    min_lr: 5.021e-4,
                },
                seed,
                regime: self,
                ..TrainConfig::default()
            },
            Regime::Standard => TrainConfig {
                batch_size: 64,
                max_epochs: 627,
                lr: 8.056e-4,
                beta1: 0.8218,
                beta2: 0.9845,
                scheduler: Scheduler::Plateau {
                    factor: 0.782,
                    patience: 30,
                    min_lr: 7.737e-4,
                },
                seed,
                regime: self,
                ..TrainConfig::default()
            },
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Small100 => "small100",
            Regime::Standard => "standard",
        })
    }
}

impl FromStr for Regime {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "small100" | "small" => Ok(Regime::Small100),
            "standard" | "full" => Ok(Regime::Standard),
            _ => Err(ConfigError::Unknown {
                kind: "regime",
                value: s.to_owned(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub scheduler: Scheduler,
    pub seed: u64,
    pub regime: Regime,
    pub clip_norm: Option<f64>,
    /// Stop once dev accuracy reaches this value.
    pub stop_at_accuracy: Option<f64>,
    pub eval_batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            max_epochs: 627,
            lr: 8.056e-4,
            beta1: 0.8218,
            beta2: 0.9845,
            scheduler: Scheduler::Constant,
            seed: 1,
            regime: Regime::Standard,
            clip_norm: None,
            stop_at_accuracy: None,
            eval_batch_size: 64,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.batch_size == 0 {
            return Err(ConfigError::Zero("batch_size"));
        }
        if self.eval_batch_size == 0 {
            return Err(ConfigError::Zero("eval_batch_size"));
        }
        let bad = |key: &str, v: f64| ConfigError::BadValue {
            key: key.to_owned(),
            value: v.to_string(),
        };
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(bad("train.lr", self.lr));
        }
        for (k, b) in [("train.beta1", self.beta1), ("train.beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(bad(k, b));
            }
        }
        if let Scheduler::Plateau { factor, .. } = self.scheduler {
            if !(factor > 0.0 && factor < 1.0) {
                return Err(bad("train.plateau_factor", factor));
            }
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("batch_size", self.batch_size.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("lr", self.lr.to_string()),
            ("beta1", self.beta1.to_string()),
            ("beta2", self.beta2.to_string()),
            ("seed", self.seed.to_string()),
            ("regime", self.regime.to_string()),
        ];
        match self.scheduler {
            Scheduler::Constant => out.push(("scheduler", "none".into())),
            Scheduler::Plateau { factor, patience, min_lr } => {
                out.push(("scheduler", "reduceonplateau".into()));
                out.push(("plateau_factor", factor.to_string()));
                out.push(("plateau_patience", patience.to_string()));
                out.push(("min_lr", min_lr.to_string()));
            }
            Scheduler::WarmupInvSqrt { warmup_samples } => {
                out.push(("scheduler", "warmupinvsqrt".into()));
                out.push(("warmup_samples", warmup_samples.to_string()));
            }
        }
        if let Some(c) = self.clip_norm {
            out.push(("clip_norm", c.to_string()));
        }
        out.into_iter().map(|(k, v)| (format!("train.{k}"), v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_presets() {
        let s = Regime::Small100.train_config(3);
        assert_eq!((s.batch_size, s.max_epochs, s.lr), (16, 607, 2.411e-4));
        let m = Regime::Small100.model_config(Arch::PointerGenerator);
        assert_eq!((m.enc_layers, m.dec_layers, m.emb, m.hid, m.dropout), (2, 2, 512, 1024, 0.3662));
        let t = Regime::Standard.train_config(3);
        assert_eq!((t.batch_size, t.max_epochs, t.lr), (64, 627, 8.056e-4));
        let m = Regime::Standard.model_config(Arch::PointerGenerator);
        assert_eq!((m.enc_layers, m.dec_layers, m.emb, m.hid, m.dropout), (1, 1, 1024, 2048, 0.2212));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn limit_selects_regime() {
        assert_eq!(Regime::for_limit(Some(100)), Regime::Small100);
        assert_eq!(Regime::for_limit(Some(250)), Regime::Standard);
        assert_eq!(Regime::for_limit(None), Regime::Standard);
    }
}
