use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::trans_repr::ClsStrategy;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("Init-State needs hid divisible by emb (emb {emb}, hid {hid})")]
    InitStateWidth { emb: usize, hid: usize },
    #[error("Init-Char cannot be used in the decoder")]
    InitCharDecoder,
    #[error("{strategy} needs an even width, got {width}")]
    OddWidth { strategy: &'static str, width: usize },
    #[error("{0} must be positive")]
    Zero(&'static str),
    #[error("dropout {0} outside [0, 1)")]
    Dropout(f64),
    #[error("unknown {kind} {value:?}")]
    Unknown { kind: &'static str, value: String },
    #[error("missing key {0:?}")]
    Missing(String),
    #[error("bad value {value:?} for {key:?}")]
    BadValue { key: String, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arch {
    AttentiveLstm,
    PointerGenerator,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::AttentiveLstm => "AttentiveLSTM",
            Arch::PointerGenerator => "PointerGenerator",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "attentivelstm" | "lstm" => Ok(Arch::AttentiveLstm),
            "pointergenerator" | "pg" | "pglstm" => Ok(Arch::PointerGenerator),
            _ => Err(ConfigError::Unknown {
                kind: "architecture",
                value: s.to_owned(),
            }),
        }
    }
}

/// Where the translation vector enters an LSTM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    None,
    /// Appended to every input, doubling the input width.
    Concat,
    /// Appended to every input; both halves are `emb/2` wide.
    ConcatHalf,
    /// Tiled to fill the initial hidden and cell state.
    InitState,
    /// Fed as a pseudo-character before the first real one.
    InitChar,
}

impl Strategy {
    pub const ENCODER: [Strategy; 5] = [Strategy::InitState, Strategy::Concat, Strategy::ConcatHalf, Strategy::None, Strategy::InitChar];
    pub const DECODER: [Strategy; 4] = [Strategy::ConcatHalf, Strategy::InitState, Strategy::Concat, Strategy::None];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::None => "None",
            Strategy::Concat => "Concat",
            Strategy::ConcatHalf => "Concat-Half",
            Strategy::InitState => "Init-State",
            Strategy::InitChar => "Init-Char",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "none" => Ok(Strategy::None),
            "concat" => Ok(Strategy::Concat),
            "concathalf" => Ok(Strategy::ConcatHalf),
            "initstate" => Ok(Strategy::InitState),
            "initchar" => Ok(Strategy::InitChar),
            _ => Err(ConfigError::Unknown {
                kind: "strategy",
                value: s.to_owned(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub arch: Arch,
    pub emb: usize,
    pub hid: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub dropout: f64,
    pub enc_strategy: Strategy,
    pub dec_strategy: Strategy,
    pub cls_strategy: ClsStrategy,
    pub bidirectional_encoder: bool,
    /// Width of the translation embeddings.
    pub trans_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::pointer_generator(64, 128)
    }
}

impl ModelConfig {
    /// Pointer-generator with a bidirectional encoder and no translation
    /// input.
    pub fn pointer_generator(emb: usize, hid: usize) -> Self {
        Self {
            arch: Arch::PointerGenerator,
            emb,
            hid,
            enc_layers: 1,
            dec_layers: 1,
            dropout: 0.0,
            enc_strategy: Strategy::None,
            dec_strategy: Strategy::None,
            cls_strategy: ClsStrategy::None,
            bidirectional_encoder: true,
            trans_dim: 768,
        }
    }

    pub fn attentive_lstm(emb: usize, hid: usize) -> Self {
        Self {
            arch: Arch::AttentiveLstm,
            bidirectional_encoder: false,
            ..Self::pointer_generator(emb, hid)
        }
    }

    pub fn with_strategies(mut self, enc: Strategy, dec: Strategy, cls: ClsStrategy) -> Self {
        self.enc_strategy = enc;
        self.dec_strategy = dec;
        self.cls_strategy = cls;
        self
    }

    pub fn uses_translation(&self) -> bool {
        self.enc_strategy != Strategy::None || self.dec_strategy != Strategy::None
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("emb", self.emb),
            ("hid", self.hid),
            ("enc_layers", self.enc_layers),
            ("dec_layers", self.dec_layers),
            ("trans_dim", self.trans_dim),
        ] {
            if v == 0 {
                return Err(ConfigError::Zero(name));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ConfigError::Dropout(self.dropout));
        }
        if self.dec_strategy == Strategy::InitChar {
            return Err(ConfigError::InitCharDecoder);
        }
        for side in [self.enc_strategy, self.dec_strategy] {
            if side == Strategy::InitState && !self.hid.is_multiple_of(self.emb) {
                return Err(ConfigError::InitStateWidth {
                    emb: self.emb,
                    hid: self.hid,
                });
            }
            if side == Strategy::ConcatHalf && !self.emb.is_multiple_of(2) {
                return Err(ConfigError::OddWidth {
                    strategy: "Concat-Half",
                    width: self.emb,
                });
            }
            if side != Strategy::None && self.cls_strategy == ClsStrategy::Concat && !translation_width(side, self.emb).is_multiple_of(2) {
                return Err(ConfigError::OddWidth {
                    strategy: "CLS-Concat",
                    width: translation_width(side, self.emb),
                });
            }
        }
        Ok(())
    }

    /// Flat `key=value` pairs, as stored in checkpoint headers.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        [
            ("arch", self.arch.to_string()),
            ("emb", self.emb.to_string()),
            ("hid", self.hid.to_string()),
            ("enc_layers", self.enc_layers.to_string()),
            ("dec_layers", self.dec_layers.to_string()),
            ("dropout", self.dropout.to_string()),
            ("enc_strategy", self.enc_strategy.to_string()),
            ("dec_strategy", self.dec_strategy.to_string()),
            ("cls_strategy", self.cls_strategy.to_string()),
            ("bidirectional_encoder", self.bidirectional_encoder.to_string()),
            ("trans_dim", self.trans_dim.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (format!("model.{k}"), v))
        .collect()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, ConfigError> {
        let map: std::collections::HashMap<&str, &str> = pairs.into_iter().collect();
        let get = |k: &str| -> Result<&str, ConfigError> {
            map.get(format!("model.{k}").as_str())
                .copied()
                .ok_or_else(|| ConfigError::Missing(format!("model.{k}")))
        };
        fn parse<V: FromStr>(k: &str, v: &str) -> Result<V, ConfigError> {
            v.parse().map_err(|_| ConfigError::BadValue {
                key: k.to_owned(),
                value: v.to_owned(),
            })
        }
        let cfg = Self {
            arch: get("arch")?.parse()?,
            emb: parse("emb", get("emb")?)?,
            hid: parse("hid", get("hid")?)?,
            enc_layers: parse("enc_layers", get("enc_layers")?)?,
            dec_layers: parse("dec_layers", get("dec_layers")?)?,
            dropout: parse("dropout", get("dropout")?)?,
            enc_strategy: get("enc_strategy")?.parse()?,
            dec_strategy: get("dec_strategy")?.parse()?,
            cls_strategy: get("cls_strategy")?.parse().map_err(|_| ConfigError::Unknown {
                kind: "CLS strategy",
                value: map.get("model.cls_strategy").unwrap_or(&"").to_string(),
            })?,
            bidirectional_encoder: parse("bidirectional_encoder", get("bidirectional_encoder")?)?,
            trans_dim: parse("trans_dim", get("trans_dim")?)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Width of the translation vector consumed under `strategy`.
pub fn translation_width(strategy: Strategy, emb: usize) -> usize {
    if strategy == Strategy::ConcatHalf {
        emb / 2
    } else {
        emb
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_char_decoder_rejected() {
        let cfg = ModelConfig::default().with_strategies(Strategy::None, Strategy::InitChar, ClsStrategy::None);
        assert_eq!(cfg.validate(), Err(ConfigError::InitCharDecoder));
    }

    #[test]
    fn init_state_needs_multiple() {
        let mut cfg = ModelConfig::pointer_generator(6, 16).with_strategies(Strategy::InitState, Strategy::None, ClsStrategy::None);
        assert!(matches!(cfg.validate(), Err(ConfigError::InitStateWidth { .. })));
        cfg.hid = 18;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn concat_half_needs_even_emb() {
        let cfg = ModelConfig::pointer_generator(5, 10).with_strategies(Strategy::None, Strategy::ConcatHalf, ClsStrategy::None);
        assert!(matches!(cfg.validate(), Err(ConfigError::OddWidth { .. })));
    }

    #[test]
    fn cls_concat_under_concat_half_needs_quarter() {
        let cfg = ModelConfig::pointer_generator(6, 12).with_strategies(Strategy::ConcatHalf, Strategy::None, ClsStrategy::Concat);
        assert!(matches!(cfg.validate(), Err(ConfigError::OddWidth { strategy: "CLS-Concat", width: 3 })));
    }

    #[test]
    fn pairs_round_trip() {
        let cfg = ModelConfig {
            dropout: 0.3662,
            enc_layers: 2,
            ..ModelConfig::pointer_generator(8, 16).with_strategies(Strategy::InitChar, Strategy::ConcatHalf, ClsStrategy::Avg)
        };
        let pairs = cfg.to_pairs();
        let back = ModelConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn names_parse() {
        for s in Strategy::ENCODER {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!("pointer-generator".parse::<Arch>().unwrap(), Arch::PointerGenerator);
        assert!("transformer".parse::<Arch>().is_err());
    }
}
