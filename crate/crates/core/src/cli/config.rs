//! Flat `key = value` session settings.
//!
//! ```text
//! # paths
//! schema = data/schema.txt
//! catalog = data/catalog.json
//! store = data/vectors.cis
//! stoplist = data/stop.txt
//! # tokenization
//! tokenize.field_prefix = once_per_field
//! tokenize.phrase_columns = papers.Author, Conference
//! tokenize.fk_columns.dept = name, city
//! # training
//! train.dim = 200
//! train.mode = cbow
//! # closeness thresholds
//! scale.strong = 0.8
//! # maintenance
//! update.alpha_old = 0
//! update.epochs = 2
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::ciops::ClosenessScale;
use crate::embed::{
    Hyperparams, Mode, DEFAULT_ALPHA_NEW, DEFAULT_ALPHA_OLD, DEFAULT_UPDATE_EPOCHS,
};
use crate::textify::{FieldPrefix, FkExpansion, TokenizationConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub schema: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub store: Option<PathBuf>,
    /// One token per line; replaces the store's stoplist when set.
    pub stoplist: Option<PathBuf>,
    pub tokenization: TokenizationConfig,
    pub hyperparams: Hyperparams,
    pub scale: ClosenessScale,
    pub alpha_old: f64,
    pub alpha_new: f64,
    /// Replaces `train.epochs` during `update`.
    pub update_epochs: usize,
    /// Keys assigned so far.
    explicit: BTreeSet<String>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            schema: None,
            catalog: None,
            store: None,
            stoplist: None,
            tokenization: TokenizationConfig::default(),
            hyperparams: Hyperparams::default(),
            scale: ClosenessScale::default(),
            alpha_old: DEFAULT_ALPHA_OLD,
            alpha_new: DEFAULT_ALPHA_NEW,
            update_epochs: DEFAULT_UPDATE_EPOCHS,
            explicit: BTreeSet::new(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value {value:?} for {key}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("invalid boolean {value:?} for {key}")),
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

impl SessionConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut config = Self::default();
        config.apply_text(text)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        Ok(())
    }

    /// Whether `key` was assigned by a file or flag.
    pub fn is_set(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let t = &mut self.tokenization;
        let h = &mut self.hyperparams;
        match key {
            "schema" => self.schema = Some(value.into()),
            "catalog" => self.catalog = Some(value.into()),
            "store" => self.store = Some(value.into()),
            "stoplist" => self.stoplist = Some(value.into()),
            "tokenize.field_prefix" => {
                t.field_prefix = match value {
                    "none" => FieldPrefix::None,
                    "once_per_field" => FieldPrefix::OncePerField,
                    "per_token" => FieldPrefix::PerToken,
                    _ => return Err(format!("invalid value {value:?} for {key}")),
                }
            }
            "tokenize.relation_prefix" => t.relation_prefix = parse_bool(key, value)?,
            "tokenize.phrase_join" => t.phrase_join = parse_bool(key, value)?,
            "tokenize.phrase_columns" => t.phrase_columns = list(value).into_iter().collect(),
            "tokenize.split_delimiters" => {
                t.split_delimiters = value.chars().filter(|c| !c.is_whitespace()).collect()
            }
            "tokenize.range_designators" => t.range_designators = parse_bool(key, value)?,
            "tokenize.range_boundaries" => {
                t.range_boundaries = if value.is_empty() {
                    None
                } else {
                    Some(
                        list(value)
                            .iter()
                            .map(|v| parse(key, v))
                            .collect::<Result<_, _>>()?,
                    )
                }
            }
            "tokenize.fk_expansion" => {
                t.fk_expansion = match value {
                    "off" => FkExpansion::Off,
                    "after_row" => FkExpansion::AfterRow,
                    "inline" => FkExpansion::Inline,
                    _ => return Err(format!("invalid value {value:?} for {key}")),
                }
            }
            "tokenize.max_hops" => t.max_hops = parse(key, value)?,
            "tokenize.lowercase" => t.lowercase = parse_bool(key, value)?,
            "tokenize.strict_foreign_keys" => t.strict_foreign_keys = parse_bool(key, value)?,
            k if k.starts_with("tokenize.fk_columns.") => {
                let table = &k["tokenize.fk_columns.".len()..];
                if table.is_empty() {
                    return Err(format!("missing table name in {key}"));
                }
                t.fk_columns.insert(table.to_string(), list(value));
            }
            "train.dim" => h.dim = parse(key, value)?,
            "train.window" => h.window = parse(key, value)?,
            "train.epochs" => h.epochs = parse(key, value)?,
            "train.negatives" => h.negatives = parse(key, value)?,
            "train.learning_rate" => h.learning_rate = parse(key, value)?,
            "train.min_count" => h.min_count = parse(key, value)?,
            "train.mode" => {
                h.mode = match value {
                    "skipgram" => Mode::Skipgram,
                    "cbow" => Mode::Cbow,
                    _ => return Err(format!("invalid value {value:?} for {key}")),
                }
            }
            "train.seed" => h.seed = parse(key, value)?,
            "train.unigram_power" => h.unigram_power = parse(key, value)?,
            "train.threads" => h.threads = parse(key, value)?,
            k if k.starts_with("scale.") => {
                let v = parse(key, value)?;
                self.scale
                    .set(&k["scale.".len()..], v)
                    .map_err(|e| e.to_string())?;
            }
            "update.alpha_old" => self.alpha_old = parse(key, value)?,
            "update.alpha_new" => self.alpha_new = parse(key, value)?,
            "update.epochs" => self.update_epochs = parse(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        self.explicit.insert(key.to_string());
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        self.tokenization.validate().map_err(|e| e.to_string())?;
        self.hyperparams.validate().map_err(|e| e.to_string())?;
        self.scale.validate().map_err(|e| e.to_string())?;
        for a in [self.alpha_old, self.alpha_new] {
            if !(a >= 0.0 && a.is_finite()) {
                return Err("update multipliers must be non-negative".into());
            }
        }
        if self.update_epochs == 0 {
            return Err("update.epochs must be positive".into());
        }
        Ok(())
    }
}
