//! Key-value text configs for generator specs and server configs.
//!
//! The format is deliberately small: one `key = value` pair per line,
//! blank lines and `#` comments ignored, integers in decimal or `0x` hex,
//! lists comma-separated. Generator specs use the keys `algorithm`,
//! `preset`, `seed`, `seed2`, `a`, `c`, `m`, `lags`, `op`, `init`, and
//! `otp_length`; the server config layers its own keys on top of the same
//! syntax.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::prng::{Algorithm, LcgParams, LfibOp, LfibParams, PrngSpec};

/// Errors raised while reading a key-value config.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    BadLine { line: usize, text: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("key {key:?}: bad integer {value:?}")]
    BadInt { key: String, value: String },
    #[error("key {key:?}: unknown value {value:?}")]
    BadValue { key: String, value: String },
    #[error("missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("exactly one of `preset` or `algorithm` must be given")]
    PresetOrAlgorithm,
    #[error("invalid generator parameters: {0}")]
    BadSpec(#[from] crate::prng::PrngError),
}

/// Parsed `key = value` pairs with keys kept unique.
#[derive(Debug, Clone, Default)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
}

impl KvMap {
    /// Parses config text. Keys may appear at most once.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::BadLine {
                    line,
                    text: trimmed.to_string(),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::BadLine {
                    line,
                    text: trimmed.to_string(),
                });
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(ConfigError::DuplicateKey { line, key });
            }
        }
        Ok(KvMap { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Integer value: decimal or `0x`-prefixed hex.
    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_u64(v)
                .map(Some)
                .ok_or_else(|| ConfigError::BadInt {
                    key: key.to_string(),
                    value: v.to_string(),
                }),
        }
    }

    /// Comma-separated integer list.
    pub fn get_u64_list(&self, key: &str) -> Result<Option<Vec<u64>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|item| {
                    parse_u64(item.trim()).ok_or_else(|| ConfigError::BadInt {
                        key: key.to_string(),
                        value: item.trim().to_string(),
                    })
                })
                .collect::<Result<Vec<u64>, _>>()
                .map(Some),
        }
    }

    /// Remaining keys not consumed by a known-key list; used by callers to
    /// reject typos.
    pub fn unknown_keys(&self, known: &[&str]) -> Vec<String> {
        self.entries
            .keys()
            .filter(|k| !known.contains(&k.as_str()))
            .cloned()
            .collect()
    }
}

/// Parses decimal or `0x`-hex into u64.
pub fn parse_u64(text: &str) -> Option<u64> {
    if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok()
    } else {
        text.parse().ok()
    }
}

pub(crate) const SPEC_KEYS: &[&str] = &[
    "algorithm",
    "preset",
    "seed",
    "seed2",
    "a",
    "c",
    "m",
    "lags",
    "op",
    "init",
    "otp_length",
];

impl PrngSpec {
    /// Reads a generator spec from config text.
    pub fn from_config_str(text: &str) -> Result<Self, ConfigError> {
        let kv = KvMap::parse(text)?;
        Self::from_kv(&kv, SPEC_KEYS)
    }

    /// Reads a generator spec from an already-parsed map. `known_keys`
    /// lists every key the surrounding config may legitimately contain,
    /// so embedding configs (the server config) can extend the key set.
    pub fn from_kv(kv: &KvMap, known_keys: &[&str]) -> Result<Self, ConfigError> {
        if let Some(unknown) = kv.unknown_keys(known_keys).into_iter().next() {
            return Err(ConfigError::UnknownKey(unknown));
        }
        let seed = kv.get_u64("seed")?;
        let seed2 = kv.get_u64("seed2")?;
        let otp_length = kv.get_u64("otp_length")?.unwrap_or(6) as u8;

        let algorithm = match (kv.get("preset"), kv.get("algorithm")) {
            (Some(preset), None) => {
                let mut spec = match preset {
                    "c_rand" => PrngSpec::c_rand(seed.unwrap_or(1)),
                    "php_rand" => PrngSpec::php_rand(seed.unwrap_or(1)),
                    "java_lcg" => PrngSpec::java_lcg(seed.ok_or(ConfigError::MissingKey("seed"))?),
                    "lcg_value" => PrngSpec::lcg_value(
                        seed.ok_or(ConfigError::MissingKey("seed"))?,
                        seed2.ok_or(ConfigError::MissingKey("seed2"))?,
                    ),
                    "mt19937" => PrngSpec::mt19937(seed.unwrap_or(5489)),
                    "well512" => PrngSpec::well512(seed.unwrap_or(5489)),
                    other => {
                        return Err(ConfigError::BadValue {
                            key: "preset".to_string(),
                            value: other.to_string(),
                        })
                    }
                };
                spec.otp_length = otp_length;
                spec.make_generator()?;
                return Ok(spec);
            }
            (None, Some(tag)) => match tag {
                "lcg" => Algorithm::Lcg(LcgParams::plain(
                    kv.get_u64("a")?.ok_or(ConfigError::MissingKey("a"))?,
                    kv.get_u64("c")?.ok_or(ConfigError::MissingKey("c"))?,
                    kv.get_u64("m")?.ok_or(ConfigError::MissingKey("m"))?,
                )),
                "lfib" => {
                    let lags = kv
                        .get_u64_list("lags")?
                        .ok_or(ConfigError::MissingKey("lags"))?
                        .iter()
                        .map(|&l| l as u32)
                        .collect();
                    let op = match kv.get("op").ok_or(ConfigError::MissingKey("op"))? {
                        "add" => LfibOp::Add,
                        "sub" => LfibOp::Sub,
                        "mul" => LfibOp::Mul,
                        "xor" => LfibOp::Xor,
                        other => {
                            return Err(ConfigError::BadValue {
                                key: "op".to_string(),
                                value: other.to_string(),
                            })
                        }
                    };
                    Algorithm::Lfib(LfibParams {
                        lags,
                        op,
                        m: kv.get_u64("m")?.ok_or(ConfigError::MissingKey("m"))?,
                        init: kv
                            .get_u64_list("init")?
                            .ok_or(ConfigError::MissingKey("init"))?,
                    })
                }
                "mt19937" => Algorithm::Mt19937,
                "well512" => Algorithm::Well512,
                "dual_lcg_combined" => Algorithm::DualLcg,
                "os_csprng" => Algorithm::OsCsprng,
                other => {
                    return Err(ConfigError::BadValue {
                        key: "algorithm".to_string(),
                        value: other.to_string(),
                    })
                }
            },
            _ => return Err(ConfigError::PresetOrAlgorithm),
        };

        let spec = PrngSpec {
            algorithm,
            seed,
            seed2,
            otp_length,
        };
        // Parameters are always validated; the seed check only runs when a
        // seed is present — templates may defer it (brute force fills it in).
        match &spec.algorithm {
            Algorithm::Lcg(p) => p.validate()?,
            Algorithm::Lfib(p) => p.validate()?,
            _ => {}
        }
        crate::prng::otp_modulus(spec.otp_length)?;
        if spec.seed.is_some() || matches!(spec.algorithm, Algorithm::OsCsprng) {
            spec.make_generator()?;
        }
        Ok(spec)
    }

    /// Renders the spec back to config text (round-trips with
    /// [`PrngSpec::from_config_str`]).
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut push = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        match &self.algorithm {
            Algorithm::Lcg(p) => match self.label().as_str() {
                "c_rand" => push("preset", "c_rand".to_string()),
                "java_lcg" => push("preset", "java_lcg".to_string()),
                _ => {
                    push("algorithm", "lcg".to_string());
                    push("a", p.a.to_string());
                    push("c", p.c.to_string());
                    push("m", p.m.to_string());
                }
            },
            Algorithm::Lfib(p) => {
                push("algorithm", "lfib".to_string());
                push(
                    "lags",
                    p.lags
                        .iter()
                        .map(u32::to_string)
                        .collect::<Vec<_>>()
                        .join(","),
                );
                push(
                    "op",
                    match p.op {
                        LfibOp::Add => "add",
                        LfibOp::Sub => "sub",
                        LfibOp::Mul => "mul",
                        LfibOp::Xor => "xor",
                    }
                    .to_string(),
                );
                push("m", p.m.to_string());
                push(
                    "init",
                    p.init
                        .iter()
                        .map(u64::to_string)
                        .collect::<Vec<_>>()
                        .join(","),
                );
            }
            Algorithm::Mt19937 => push("algorithm", "mt19937".to_string()),
            Algorithm::Well512 => push("algorithm", "well512".to_string()),
            Algorithm::DualLcg => push("preset", "lcg_value".to_string()),
            Algorithm::OsCsprng => push("algorithm", "os_csprng".to_string()),
        }
        if let Some(seed) = self.seed {
            push("seed", seed.to_string());
        }
        if let Some(seed2) = self.seed2 {
            push("seed2", seed2.to_string());
        }
        push("otp_length", self.otp_length.to_string());
        out
    }
}
