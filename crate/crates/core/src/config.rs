//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected. [`RunConfig::render`] writes every key, so an echoed config
//! reproduces the run on its own.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::datagen::DEFAULT_K_NEG;
use crate::vq::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    Node,
    Hight,
}

impl StreamMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StreamMode::Node => "node",
            StreamMode::Hight => "hight",
        }
    }
}

impl FromStr for StreamMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "node" => Ok(StreamMode::Node),
            "hight" => Ok(StreamMode::Hight),
            _ => Err(format!("expected `node` or `hight`, found `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// 0 uses every available core.
    pub jobs: usize,
    /// Empty selects the built-in registry.
    pub registry: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub adapters: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub train: TrainConfig,
    /// Output width of freshly initialised adapters; 0 uses identity adapters.
    pub adapter_dim: usize,
    pub mode: StreamMode,
    pub k_neg: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            jobs: 0,
            registry: None,
            checkpoint: None,
            adapters: None,
            out: None,
            train: TrainConfig::default(),
            adapter_dim: 0,
            mode: StreamMode::Hight,
            k_neg: DEFAULT_K_NEG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}:{line}: expected `key = value`")]
    Syntax { origin: String, line: usize },
    #[error("{origin}:{line}: unknown key `{key}`")]
    UnknownKey { origin: String, line: usize, key: String },
    #[error("{origin}:{line}: bad value for `{key}`: {reason}")]
    Value {
        origin: String,
        line: usize,
        key: String,
        reason: String,
    },
    #[error("{0}: {1}")]
    Io(String, String),
}

/// Every accepted key with its default, in render order.
pub const KEYS: &[&str] = &[
    "seed",
    "jobs",
    "registry",
    "checkpoint",
    "adapters",
    "out",
    "mode",
    "adapter_dim",
    "k_neg",
    "gamma",
    "beta",
    "mask_rate",
    "steps",
    "step_size",
    "batch_size",
    "hidden",
    "layers",
    "atom_codes_per_class",
    "motif_codes",
    "normalize_commitment",
];

fn path_value(v: &str) -> Option<PathBuf> {
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn path_text(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    /// Sets one key; `origin` and `line` only label errors.
    pub fn set(&mut self, key: &str, value: &str, origin: &str, line: usize) -> Result<(), ConfigError> {
        fn num<T: FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| e.to_string())
        }
        let v = value.trim();
        let result: Result<(), String> = (|| {
            match key {
                "seed" => self.seed = num(v)?,
                "jobs" => self.jobs = num(v)?,
                "registry" => self.registry = path_value(v),
                "checkpoint" => self.checkpoint = path_value(v),
                "adapters" => self.adapters = path_value(v),
                "out" => self.out = path_value(v),
                "mode" => self.mode = v.parse()?,
                "adapter_dim" => self.adapter_dim = num(v)?,
                "k_neg" => self.k_neg = num(v)?,
                "gamma" => self.train.gamma = num(v)?,
                "beta" => self.train.beta = num(v)?,
                "mask_rate" => self.train.mask_rate = num(v)?,
                "steps" => self.train.steps = num(v)?,
                "step_size" => self.train.step_size = num(v)?,
                "batch_size" => self.train.batch_size = num(v)?,
                "hidden" => self.train.hidden = num(v)?,
                "layers" => self.train.layers = num(v)?,
                "atom_codes_per_class" => self.train.atom_codes_per_class = num(v)?,
                "motif_codes" => self.train.motif_codes = num(v)?,
                "normalize_commitment" => self.train.normalize_commitment = num(v)?,
                _ => return Err(String::new()),
            }
            Ok(())
        })();
        result.map_err(|reason| {
            if KEYS.contains(&key) {
                ConfigError::Value {
                    origin: origin.to_string(),
                    line,
                    key: key.to_string(),
                    reason,
                }
            } else {
                ConfigError::UnknownKey {
                    origin: origin.to_string(),
                    line,
                    key: key.to_string(),
                }
            }
        })
    }

    /// Applies a `key=value` override given on the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| ConfigError::Syntax {
            origin: "--set".into(),
            line: 0,
        })?;
        self.set(k.trim(), v, "--set", 0)
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: origin.to_string(),
                line: i + 1,
            })?;
            self.set(k.trim(), v, origin, i + 1)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Tokenizer settings with the run seed.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    pub fn value(&self, key: &str) -> Option<String> {
        let t = &self.train;
        Some(match key {
            "seed" => self.seed.to_string(),
            "jobs" => self.jobs.to_string(),
            "registry" => path_text(&self.registry),
            "checkpoint" => path_text(&self.checkpoint),
            "adapters" => path_text(&self.adapters),
            "out" => path_text(&self.out),
            "mode" => self.mode.as_str().to_string(),
            "adapter_dim" => self.adapter_dim.to_string(),
            "k_neg" => self.k_neg.to_string(),
            "gamma" => t.gamma.to_string(),
            "beta" => t.beta.to_string(),
            "mask_rate" => t.mask_rate.to_string(),
            "steps" => t.steps.to_string(),
            "step_size" => t.step_size.to_string(),
            "batch_size" => t.batch_size.to_string(),
            "hidden" => t.hidden.to_string(),
            "layers" => t.layers.to_string(),
            "atom_codes_per_class" => t.atom_codes_per_class.to_string(),
            "motif_codes" => t.motif_codes.to_string(),
            "normalize_commitment" => t.normalize_commitment.to_string(),
            _ => return None,
        })
    }

    pub fn render(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.value(k).expect("listed key")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\nseed = 9\nmode=node\nstep_size = 0.01\nregistry = fg.tsv\n", "a.conf")
            .unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&cfg.render(), "echo").unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.mode, StreamMode::Node);
        assert_eq!(back.train_config().seed, 9);
        assert_eq!(back.registry.as_deref(), Some(Path::new("fg.tsv")));
    }

    #[test]
    fn errors_carry_location() {
        let mut cfg = RunConfig::default();
        assert_eq!(
            cfg.apply_text("seed = 1\nlearning_rate = 3\n", "x.conf"),
            Err(ConfigError::UnknownKey {
                origin: "x.conf".into(),
                line: 2,
                key: "learning_rate".into()
            })
        );
        assert!(matches!(cfg.apply_text("steps = many", "x.conf"), Err(ConfigError::Value { line: 1, .. })));
        assert!(matches!(cfg.apply_text("\nseed 4", "x.conf"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(cfg.apply_override("mode=hight").is_ok());
        assert!(cfg.apply_override("mode").is_err());
    }

    #[test]
    fn every_key_renders() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.render().lines().count(), KEYS.len());
        assert!(KEYS.iter().all(|k| cfg.value(k).is_some()));
    }
}
