//! Similarity kernels behind every cognitive predicate: cosine, `vec`,
//! `contains`, the proximity family over token sets, and analogy scoring.
//!
//! All arithmetic is `f64` over the store's `f32` vectors.

mod analogy;
mod proximity;

use serde::{Deserialize, Serialize};

use crate::textify::{Database, TextifyError, TokenizationConfig, Tokenizer};
use crate::vecstore::VectorStore;

pub use analogy::{analogy_3cosadd, analogy_3cosmul, DEFAULT_EPSILON};
pub use proximity::{
    proximity_avg, proximity_max, proximity_top2_avg, subset_proximity_avg, TokenSet,
    EMPTY_SET_SCORE, SUBSET_GUARD,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CiError {
    #[error("cosine undefined for a zero-norm vector")]
    UndefinedDistance,
    #[error("vector length mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("token {0:?} has no vector")]
    OutOfVocabulary(String),
    #[error("subset enumeration would compare {pairs} subset pairs (limit {limit})")]
    SubsetGuard { pairs: u128, limit: u128 },
    #[error("subset size must be at least 1")]
    SubsetSize,
    #[error("empty candidate list")]
    NoCandidates,
    #[error("3COSMUL denominator vanishes for candidate {0:?}")]
    Denominator(String),
    #[error("invalid closeness scale: {0}")]
    Scale(String),
}

/// `dot(a, b) / (|a| |b|)`, clamped to `[-1, 1]`.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, CiError> {
    if a.len() != b.len() {
        return Err(CiError::Dimension {
            left: a.len(),
            right: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(CiError::UndefinedDistance);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// The stored vector of `token`, widened to `f64`.
pub fn vec(token: &str, store: &VectorStore) -> Result<Vec<f64>, CiError> {
    store
        .vector(token)
        .ok_or_else(|| CiError::OutOfVocabulary(token.to_string()))
}

/// Occurrences of `token` in a tokenized scope.
pub fn contains<S: AsRef<str>>(scope: &[S], token: &str) -> usize {
    scope.iter().filter(|t| t.as_ref() == token).count()
}

/// Text region a `contains` or proximity argument is tokenized from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope<'a> {
    Cell {
        table: &'a str,
        row: usize,
        column: &'a str,
    },
    Row {
        table: &'a str,
        row: usize,
    },
    Database,
}

/// Tokens of `scope` under `config`. Rows include foreign-key expansion up
/// to `config.max_hops`.
pub fn scope_tokens(
    db: &Database,
    config: &TokenizationConfig,
    scope: Scope<'_>,
) -> Result<Vec<String>, TextifyError> {
    let tokenizer = Tokenizer::new(db, config)?;
    match scope {
        Scope::Cell { table, row, column } => {
            let t = db
                .table(table)
                .ok_or_else(|| TextifyError::UnknownTable(table.to_string()))?;
            let c = t
                .column_index(column)
                .ok_or_else(|| TextifyError::UnknownColumn {
                    table: table.to_string(),
                    column: column.to_string(),
                })?;
            if row >= t.rows.len() {
                return Err(TextifyError::RowOutOfRange {
                    table: table.to_string(),
                    row,
                });
            }
            Ok(tokenizer.cell(t, row, c))
        }
        Scope::Row { table, row } => tokenizer.row(table, row, config.max_hops),
        Scope::Database => Ok(tokenizer.database(None)?.tokens().to_vec()),
    }
}

/// Named cosine thresholds for qualitative closeness predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosenessScale {
    pub very_strong: f64,
    pub strong: f64,
    pub moderate: f64,
    pub weak: f64,
    pub very_weak: f64,
}

impl Default for ClosenessScale {
    fn default() -> Self {
        Self {
            very_strong: 0.95,
            strong: 0.75,
            moderate: 0.5,
            weak: 0.25,
            very_weak: 0.1,
        }
    }
}

impl ClosenessScale {
    pub const NAMES: [&'static str; 5] = ["very_strong", "strong", "moderate", "weak", "very_weak"];

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "very_strong" => Some(self.very_strong),
            "strong" => Some(self.strong),
            "moderate" => Some(self.moderate),
            "weak" => Some(self.weak),
            "very_weak" => Some(self.very_weak),
            _ => None,
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), CiError> {
        let slot = match name {
            "very_strong" => &mut self.very_strong,
            "strong" => &mut self.strong,
            "moderate" => &mut self.moderate,
            "weak" => &mut self.weak,
            "very_weak" => &mut self.very_weak,
            _ => return Err(CiError::Scale(format!("unknown closeness name {name:?}"))),
        };
        *slot = value;
        Ok(())
    }

    /// Thresholds lie in `[-1, 1]` and do not increase along [`Self::NAMES`].
    pub fn validate(&self) -> Result<(), CiError> {
        let values = [
            self.very_strong,
            self.strong,
            self.moderate,
            self.weak,
            self.very_weak,
        ];
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(CiError::Scale("thresholds must lie in [-1, 1]".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(CiError::Scale(
                "thresholds must not increase from very_strong to very_weak".into(),
            ));
        }
        Ok(())
    }
}
