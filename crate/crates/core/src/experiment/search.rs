use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Arch, ModelConfig};
use crate::train::{Regime, Scheduler, TrainConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("bad search space: {0}")]
    BadSpace(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    /// `round(U(min, max) / q) * q`
    QUniform { min: f64, max: f64, q: f64 },
    Uniform { min: f64, max: f64 },
    LogUniform { min: f64, max: f64 },
}

impl Dist {
    fn check(&self, name: &str) -> Result<(), SearchError> {
        let bad = |why: &str| Err(SearchError::BadSpace(format!("{name}: {why}")));
        match *self {
            Dist::QUniform { min, max, q } => {
                if q <= 0.0 {
                    return bad("quantum must be positive");
                }
                if min > max {
                    return bad("min exceeds max");
                }
            }
            Dist::Uniform { min, max } if min > max => return bad("min exceeds max"),
            Dist::LogUniform { min, max } if min <= 0.0 || min > max => return bad("log-uniform needs 0 < min <= max"),
            _ => {}
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u = |rng: &mut dyn rand::RngCore, a: f64, b: f64| if a == b { a } else { rng.random_range(a..b) };
        match *self {
            Dist::QUniform { min, max, q } => ((u(rng, min, max) / q).round() * q).clamp(min, max),
            Dist::Uniform { min, max } => u(rng, min, max),
            Dist::LogUniform { min, max } => u(rng, min.ln(), max.ln()).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerChoice {
    ReduceOnPlateau,
    WarmupInvSqrt,
    None,
}

/// Per-architecture choices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conditional {
    pub arch: Arch,
    pub heads: Vec<usize>,
    pub enc_layers: Vec<usize>,
    pub dec_layers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub archs: Vec<Arch>,
    pub emb: Dist,
    pub hid: Dist,
    pub dropout: Dist,
    pub conditionals: Vec<Conditional>,
    pub batch_size: Vec<usize>,
    pub lr: Dist,
    pub beta1: Dist,
    pub beta2: Dist,
    pub schedulers: Vec<SchedulerChoice>,
    pub warmup_samples: Dist,
    pub plateau_factor: Dist,
    pub plateau_patience: Dist,
    pub min_lr: Dist,
}

impl Default for SearchSpace {
    /// The tuning space used for the LSTM baselines.
    fn default() -> Self {
        let lstm = |arch| Conditional {
            arch,
            heads: vec![1],
            enc_layers: vec![1, 2],
            dec_layers: vec![1, 2],
        };
        Self {
            archs: vec![Arch::PointerGenerator, Arch::AttentiveLstm],
            emb: Dist::QUniform {
                min: 128.0,
                max: 1024.0,
                q: 64.0,
            },
            hid: Dist::QUniform {
                min: 128.0,
                max: 2048.0,
                q: 64.0,
            },
            dropout: Dist::Uniform { min: 0.0, max: 0.5 },
            conditionals: vec![lstm(Arch::PointerGenerator), lstm(Arch::AttentiveLstm)],
            batch_size: vec![16, 32, 64],
            lr: Dist::LogUniform { min: 1e-6, max: 0.01 },
            beta1: Dist::Uniform { min: 0.8, max: 0.999 },
            beta2: Dist::Uniform { min: 0.98, max: 0.999 },
            schedulers: vec![SchedulerChoice::ReduceOnPlateau, SchedulerChoice::WarmupInvSqrt, SchedulerChoice::None],
            warmup_samples: Dist::QUniform {
                min: 0.0,
                max: 5e6,
                q: 1.0,
            },
            plateau_factor: Dist::Uniform { min: 0.1, max: 0.9 },
            plateau_patience: Dist::QUniform {
                min: 10.0,
                max: 50.0,
                q: 1.0,
            },
            min_lr: Dist::Uniform { min: 1e-7, max: 1e-3 },
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<(), SearchError> {
        let empty = |name: &str| Err(SearchError::BadSpace(format!("{name}: no choices")));
        if self.archs.is_empty() {
            return empty("architecture");
        }
        if self.batch_size.is_empty() || self.batch_size.contains(&0) {
            return Err(SearchError::BadSpace("batch size choices must be nonempty and positive".into()));
        }
        if self.schedulers.is_empty() {
            return empty("scheduler");
        }
        for (name, d) in [
            ("emb", self.emb),
            ("hid", self.hid),
            ("dropout", self.dropout),
            ("lr", self.lr),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("warmup_samples", self.warmup_samples),
            ("plateau_factor", self.plateau_factor),
            ("plateau_patience", self.plateau_patience),
            ("min_lr", self.min_lr),
        ] {
            d.check(name)?;
        }
        for a in &self.archs {
            let c = self
                .conditional(*a)
                .ok_or_else(|| SearchError::BadSpace(format!("no conditional choices for {a}")))?;
            if c.heads.is_empty() || c.enc_layers.is_empty() || c.dec_layers.is_empty() || c.enc_layers.contains(&0) || c.dec_layers.contains(&0) {
                return Err(SearchError::BadSpace(format!("{a}: empty or zero conditional choices")));
            }
        }
        Ok(())
    }

    fn conditional(&self, arch: Arch) -> Option<&Conditional> {
        self.conditionals.iter().find(|c| c.arch == arch)
    }
}

/// One draw from a [`SearchSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledConfig {
    pub arch: Arch,
    pub emb: usize,
    pub hid: usize,
    pub dropout: f64,
    pub heads: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub scheduler: Scheduler,
}

impl SampledConfig {
    pub fn model_config(&self) -> ModelConfig {
        let base = match self.arch {
            Arch::PointerGenerator => ModelConfig::pointer_generator(self.emb, self.hid),
            Arch::AttentiveLstm => ModelConfig::attentive_lstm(self.emb, self.hid),
        };
        ModelConfig {
            enc_layers: self.enc_layers,
            dec_layers: self.dec_layers,
            dropout: self.dropout,
            ..base
        }
    }

    pub fn train_config(&self, seed: u64, max_epochs: usize) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            max_epochs,
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            scheduler: self.scheduler,
            seed,
            regime: Regime::Standard,
            ..TrainConfig::default()
        }
    }

    pub fn csv_header() -> &'static str {
        "index,arch,emb,hid,dropout,heads,enc_layers,dec_layers,batch_size,lr,beta1,beta2,scheduler,warmup_samples,plateau_factor,plateau_patience,min_lr"
    }

    pub fn csv_row(&self, index: usize) -> String {
        let (name, warm, factor, patience, min_lr) = match self.scheduler {
            Scheduler::Constant => ("none", String::new(), String::new(), String::new(), String::new()),
            Scheduler::WarmupInvSqrt { warmup_samples } => ("warmupinvsqrt", warmup_samples.to_string(), String::new(), String::new(), String::new()),
            Scheduler::Plateau { factor, patience, min_lr } => ("reduceonplateau", String::new(), format!("{factor:.6}"), patience.to_string(), format!("{min_lr:.6e}")),
        };
        format!(
            "{index},{},{},{},{:.6},{},{},{},{},{:.6e},{:.6},{:.6},{name},{warm},{factor},{patience},{min_lr}",
            self.arch, self.emb, self.hid, self.dropout, self.heads, self.enc_layers, self.dec_layers, self.batch_size, self.lr, self.beta1, self.beta2
        )
    }
}

/// `n` seeded draws. Architecture-specific values come from that
/// architecture's conditional choices.
pub fn random_search(space: &SearchSpace, n: usize, seed: u64) -> Result<Vec<SampledConfig>, SearchError> {
    space.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let arch = *space.archs.choose(&mut rng).unwrap();
        let cond = space.conditional(arch).unwrap();
        let emb = space.emb.sample(&mut rng) as usize;
        let hid = space.hid.sample(&mut rng) as usize;
        let dropout = space.dropout.sample(&mut rng);
        let heads = *cond.heads.choose(&mut rng).unwrap();
        let enc_layers = *cond.enc_layers.choose(&mut rng).unwrap();
        let dec_layers = *cond.dec_layers.choose(&mut rng).unwrap();
        let batch_size = *space.batch_size.choose(&mut rng).unwrap();
        let lr = space.lr.sample(&mut rng);
        let beta1 = space.beta1.sample(&mut rng);
        let beta2 = space.beta2.sample(&mut rng);
        let scheduler = match *space.schedulers.choose(&mut rng).unwrap() {
            SchedulerChoice::None => Scheduler::Constant,
            SchedulerChoice::WarmupInvSqrt => Scheduler::WarmupInvSqrt {
                warmup_samples: space.warmup_samples.sample(&mut rng) as u64,
            },
            SchedulerChoice::ReduceOnPlateau => Scheduler::Plateau {
                factor: space.plateau_factor.sample(&mut rng),
                patience: space.plateau_patience.sample(&mut rng) as usize,
                min_lr: space.min_lr.sample(&mut rng),
            },
        };
        out.push(SampledConfig {
            arch,
            emb,
            hid,
            dropout,
            heads,
            enc_layers,
            dec_layers,
            batch_size,
            lr,
            beta1,
            beta2,
            scheduler,
        });
    }
    Ok(out)
}
