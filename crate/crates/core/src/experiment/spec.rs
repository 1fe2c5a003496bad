use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::autodiff::config_hash;
use crate::model::{Arch, ConfigError, ModelConfig, Strategy};
use crate::train::{F1Mode, Regime, Scheduler, TrainConfig};
use crate::trans_repr::ClsStrategy;

use super::KvConfig;

/// Training-set size: a fixed number of instances, or all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Limit {
    N(usize),
    All,
}

impl Limit {
    pub fn count(self) -> Option<usize> {
        match self {
            Limit::N(n) => Some(n),
            Limit::All => None,
        }
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::N(n) => write!(f, "{n}"),
            Limit::All => f.write_str("all"),
        }
    }
}

impl FromStr for Limit {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Limit::All);
        }
        match s.parse() {
            Ok(n) if n > 0 => Ok(Limit::N(n)),
            _ => Err(ConfigError::BadValue {
                key: "experiment.limits".into(),
                value: s.to_owned(),
            }),
        }
    }
}

/// One cell of the strategy grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    pub enc: Strategy,
    pub dec: Strategy,
    pub cls: ClsStrategy,
}

impl GridPoint {
    pub fn is_baseline(&self) -> bool {
        self.enc == Strategy::None && self.dec == Strategy::None
    }

    /// Directory-safe name; the baseline has no CLS component.
    pub fn label(&self) -> String {
        if self.is_baseline() {
            "None_None".into()
        } else {
            format!("{}_{}_{}", self.enc, self.dec, self.cls)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSplit {
    Dev,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub train_path: PathBuf,
    pub dev_path: PathBuf,
    pub test_path: Option<PathBuf>,
    pub embeddings_path: Option<PathBuf>,
    pub alignments_path: Option<PathBuf>,
    pub eval_split: EvalSplit,
    pub limits: Vec<Limit>,
    pub seeds: Vec<u64>,
    pub arch: Arch,
    pub regime: Option<Regime>,
    pub enc: Vec<Strategy>,
    pub dec: Vec<Strategy>,
    pub cls: Vec<ClsStrategy>,
    pub stage2: Vec<(Strategy, Strategy)>,
    pub sweep_average_seeds: bool,
    pub separator: char,
    pub f1_mode: F1Mode,
    pub workers: usize,
    pub outdir: PathBuf,
    /// Every setting, used for overrides and the spec hash.
    pub settings: KvConfig,
}

fn pair(s: &str) -> Result<(Strategy, Strategy), ConfigError> {
    let (a, b) = s.split_once('/').ok_or_else(|| ConfigError::BadValue {
        key: "sweep.stage2".into(),
        value: s.to_owned(),
    })?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

impl ExperimentSpec {
    pub fn from_config(c: &KvConfig) -> Result<Self, ConfigError> {
        let cls = match c.raw("grid.cls") {
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|_| ConfigError::Unknown {
                        kind: "CLS strategy",
                        value: s.to_owned(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![ClsStrategy::None],
        };
        let stage2 = match c.raw("sweep.stage2") {
            Some(v) => v.split(';').map(str::trim).filter(|s| !s.is_empty()).map(pair).collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        let separator: String = c.get_or("eval.separator", "-".to_owned())?;
        let mut sep = separator.chars();
        let separator = match (sep.next(), sep.next()) {
            (Some(ch), None) => ch,
            _ => {
                return Err(ConfigError::BadValue {
                    key: "eval.separator".into(),
                    value: separator,
                })
            }
        };
        let spec = Self {
            name: c.get_or("experiment.name", "experiment".to_owned())?,
            train_path: c.require("data.train")?,
            dev_path: c.require("data.dev")?,
            test_path: c.get("data.test")?,
            embeddings_path: c.get("data.embeddings")?,
            alignments_path: c.get("data.alignments")?,
            eval_split: match c.raw("experiment.eval_split").unwrap_or("dev") {
                "dev" => EvalSplit::Dev,
                "test" => EvalSplit::Test,
                other => {
                    return Err(ConfigError::BadValue {
                        key: "experiment.eval_split".into(),
                        value: other.to_owned(),
                    })
                }
            },
            limits: c.list("experiment.limits")?.unwrap_or_else(|| vec![Limit::All]),
            seeds: c.list("experiment.seeds")?.unwrap_or_else(|| (1..=5).collect()),
            arch: c.get_or("model.arch", Arch::PointerGenerator)?,
            regime: match c.raw("train.regime") {
                None | Some("auto") => None,
                Some(r) => Some(r.parse()?),
            },
            enc: c.list("grid.enc")?.unwrap_or_else(|| vec![Strategy::None]),
            dec: c.list("grid.dec")?.unwrap_or_else(|| vec![Strategy::None]),
            cls,
            stage2,
            sweep_average_seeds: c.get_or("sweep.average_seeds", false)?,
            separator,
            f1_mode: match c.raw("eval.f1").unwrap_or("micro") {
                "micro" => F1Mode::Micro,
                "macro" => F1Mode::Macro,
                other => {
                    return Err(ConfigError::BadValue {
                        key: "eval.f1".into(),
                        value: other.to_owned(),
                    })
                }
            },
            workers: c.get_or("experiment.workers", 1)?,
            outdir: c.get_or("experiment.outdir", PathBuf::from("."))?,
            settings: c.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let empty = |k: &str| ConfigError::BadValue {
            key: k.to_owned(),
            value: String::new(),
        };
        if self.limits.is_empty() {
            return Err(empty("experiment.limits"));
        }
        if self.seeds.is_empty() {
            return Err(empty("experiment.seeds"));
        }
        if self.enc.is_empty() || self.dec.is_empty() || self.cls.is_empty() {
            return Err(empty("grid"));
        }
        if self.workers == 0 {
            return Err(ConfigError::Zero("experiment.workers"));
        }
        if self.dec.contains(&Strategy::InitChar) || self.stage2.iter().any(|&(_, d)| d == Strategy::InitChar) {
            return Err(ConfigError::InitCharDecoder);
        }
        if self.eval_split == EvalSplit::Test && self.test_path.is_none() {
            return Err(ConfigError::Missing("data.test".into()));
        }
        let mut points = self.grid();
        points.extend(self.stage2_grid());
        let translated = points.iter().filter(|p| !p.is_baseline()).collect::<Vec<_>>();
        if !translated.is_empty() && self.embeddings_path.is_none() {
            return Err(ConfigError::Missing("data.embeddings".into()));
        }
        if translated.iter().any(|p| p.cls.uses_alignment()) && self.alignments_path.is_none() {
            return Err(ConfigError::Missing("data.alignments".into()));
        }
        for p in &points {
            for &limit in &self.limits {
                self.model_config(*p, limit, 768)?.validate()?;
                self.train_config(limit, self.seeds[0])?.validate()?;
            }
        }
        Ok(())
    }

    /// Cells of `enc x dec x cls`; the baseline appears once.
    pub fn grid(&self) -> Vec<GridPoint> {
        self.points(&self.enc.iter().flat_map(|&e| self.dec.iter().map(move |&d| (e, d))).collect::<Vec<_>>(), &self.cls)
    }

    /// Stage-one sweep cells, with CLS fixed to CLS-None.
    pub fn sweep_grid(&self) -> Vec<GridPoint> {
        self.points(&self.enc.iter().flat_map(|&e| self.dec.iter().map(move |&d| (e, d))).collect::<Vec<_>>(), &[ClsStrategy::None])
    }

    pub fn stage2_grid(&self) -> Vec<GridPoint> {
        let cls = if self.settings.raw("grid.cls").is_some() { self.cls.clone() } else { ClsStrategy::ALL.to_vec() };
        self.points(&self.stage2, &cls)
    }

    fn points(&self, pairs: &[(Strategy, Strategy)], cls: &[ClsStrategy]) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &(enc, dec) in pairs {
            for &c in cls {
                let p = GridPoint { enc, dec, cls: c };
                let p = if p.is_baseline() { GridPoint { cls: ClsStrategy::None, ..p } } else { p };
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn regime_for(&self, limit: Limit) -> Regime {
        self.regime.unwrap_or_else(|| Regime::for_limit(limit.count()))
    }

    pub fn model_config(&self, p: GridPoint, limit: Limit, trans_dim: usize) -> Result<ModelConfig, ConfigError> {
        let c = &self.settings;
        let base = self.regime_for(limit).model_config(self.arch);
        let trans_dim = c.get_or("model.trans_dim", trans_dim)?;
        Ok(ModelConfig {
            emb: c.get_or("model.emb", base.emb)?,
            hid: c.get_or("model.hid", base.hid)?,
            enc_layers: c.get_or("model.enc_layers", base.enc_layers)?,
            dec_layers: c.get_or("model.dec_layers", base.dec_layers)?,
            dropout: c.get_or("model.dropout", base.dropout)?,
            bidirectional_encoder: c.get_or("model.bidirectional_encoder", base.bidirectional_encoder)?,
            trans_dim,
            ..base.with_strategies(p.enc, p.dec, p.cls)
        })
    }

    pub fn train_config(&self, limit: Limit, seed: u64) -> Result<TrainConfig, ConfigError> {
        let c = &self.settings;
        let base = self.regime_for(limit).train_config(seed);
        let scheduler = match c.raw("train.scheduler") {
            None => base.scheduler,
            Some("none") | Some("None") => Scheduler::Constant,
            Some("reduceonplateau") => {
                let (f, p, m) = match base.scheduler {
                    Scheduler::Plateau { factor, patience, min_lr } => (factor, patience, min_lr),
                    _ => (0.5, 10, 0.0),
                };
                Scheduler::Plateau {
                    factor: c.get_or("train.plateau_factor", f)?,
                    patience: c.get_or("train.plateau_patience", p)?,
                    min_lr: c.get_or("train.min_lr", m)?,
                }
            }
            Some("warmupinvsqrt") => Scheduler::WarmupInvSqrt {
                warmup_samples: c.require("train.warmup_samples")?,
            },
            Some(other) => {
                return Err(ConfigError::Unknown {
                    kind: "scheduler",
                    value: other.to_owned(),
                })
            }
        };
        Ok(TrainConfig {
            batch_size: c.get_or("train.batch_size", base.batch_size)?,
            max_epochs: c.get_or("train.max_epochs", base.max_epochs)?,
            lr: c.get_or("train.lr", base.lr)?,
            beta1: c.get_or("train.beta1", base.beta1)?,
            beta2: c.get_or("train.beta2", base.beta2)?,
            clip_norm: c.get("train.clip_norm")?,
            eval_batch_size: c.get_or("train.eval_batch_size", base.eval_batch_size)?,
            scheduler,
            ..base
        })
    }

    /// Hash of every setting that can change results.
    pub fn hash(&self) -> String {
        let pairs: Vec<(String, String)> = self
            .settings
            .iter()
            .filter(|(k, _)| !matches!(*k, "experiment.workers" | "experiment.outdir"))
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .collect();
        config_hash(&pairs)[..12].to_owned()
    }

    pub fn run_root(&self) -> PathBuf {
        self.outdir.join("runs").join(self.hash())
    }
}
