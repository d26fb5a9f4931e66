use serde::{Deserialize, Serialize};

use super::EmbedError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Skipgram,
    Cbow,
}

/// Training settings. Defaults follow the usual word2vec choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    /// Initial learning rate, decayed linearly to a tenth of its value.
    pub learning_rate: f64,
    pub min_count: u64,
    pub mode: Mode,
    pub seed: u64,
    pub unigram_power: f64,
    /// Worker threads. Only `1` is deterministic.
    pub threads: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            dim: 200,
            window: 5,
            epochs: 5,
            negatives: 5,
            learning_rate: 0.025,
            min_count: 1,
            mode: Mode::Skipgram,
            seed: 1,
            unigram_power: 0.75,
            threads: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: &str| Err(EmbedError::Hyperparams(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.min_count == 0 {
            return bad("min_count must be at least 1");
        }
        if !self.unigram_power.is_finite() {
            return bad("unigram power must be finite");
        }
        if self.threads == 0 {
            return bad("threads must be at least 1");
        }
        Ok(())
    }
}
