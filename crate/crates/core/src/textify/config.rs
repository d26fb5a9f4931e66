use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::TextifyError;

/// Where column-name tokens are emitted relative to a field's value tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldPrefix {
    #[default]
    None,
    /// `col v1 v2 v3`
    OncePerField,
    /// `col v1 col v2 col v3`
    PerToken,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FkExpansion {
    #[default]
    Off,
    /// Referenced row tokens follow the whole referencing row.
    AfterRow,
    /// Referenced row tokens follow the foreign-key value tokens.
    Inline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizationConfig {
    pub field_prefix: FieldPrefix,
    pub relation_prefix: bool,
    /// Join every string value into a single underscore token.
    pub phrase_join: bool,
    /// Columns (`table.column` or bare `column`) that are phrase-joined even
    /// when `phrase_join` is off.
    pub phrase_columns: BTreeSet<String>,
    /// Extra split characters. Whitespace always splits.
    pub split_delimiters: Vec<char>,
    pub range_designators: bool,
    /// Custom ascending bucket lower bounds for magnitudes. `None` selects the
    /// decade scheme (`1-4`, `5-9`, `10-49`, ...).
    pub range_boundaries: Option<Vec<f64>>,
    pub fk_expansion: FkExpansion,
    pub max_hops: u32,
    /// Per target table, the columns tokenized when a foreign key is followed.
    pub fk_columns: BTreeMap<String, Vec<String>>,
    pub lowercase: bool,
    /// Dangling foreign keys become errors instead of warnings.
    pub strict_foreign_keys: bool,
}

impl Default for TokenizationConfig {
    fn default() -> Self {
        Self {
            field_prefix: FieldPrefix::None,
            relation_prefix: false,
            phrase_join: false,
            phrase_columns: BTreeSet::new(),
            split_delimiters: Vec::new(),
            range_designators: false,
            range_boundaries: None,
            fk_expansion: FkExpansion::Off,
            max_hops: 1,
            fk_columns: BTreeMap::new(),
            lowercase: false,
            strict_foreign_keys: false,
        }
    }
}

impl TokenizationConfig {
    pub fn validate(&self) -> Result<(), TextifyError> {
        if let Some(bounds) = &self.range_boundaries {
            if bounds.is_empty() {
                return Err(TextifyError::Config("range boundary list is empty".into()));
            }
            if bounds.iter().any(|b| !b.is_finite() || *b <= 0.0) {
                return Err(TextifyError::Config(
                    "range boundaries must be finite and positive".into(),
                ));
            }
            if bounds.windows(2).any(|w| w[0] >= w[1]) {
                return Err(TextifyError::Config(
                    "range boundaries must be strictly increasing".into(),
                ));
            }
        }
        if self.split_delimiters.contains(&'_')
            && (self.phrase_join || !self.phrase_columns.is_empty())
        {
            return Err(TextifyError::Config(
                "`_` cannot be a split delimiter while phrase joining".into(),
            ));
        }
        Ok(())
    }

    pub fn is_delimiter(&self, c: char) -> bool {
        c.is_whitespace() || self.split_delimiters.contains(&c)
    }

    pub fn joins_phrases(&self, table: &str, column: &str) -> bool {
        self.phrase_join
            || self.phrase_columns.contains(column)
            || self.phrase_columns.contains(&format!("{table}.{column}"))
    }

    /// Splits free text on the configured delimiters, applying lowercasing.
    pub fn split_text(&self, text: &str) -> Vec<String> {
        text.split(|c| self.is_delimiter(c))
            .filter(|w| !w.is_empty())
            .map(|w| self.normalize(w))
            .collect()
    }

    /// Case normalization applied to string values.
    pub fn normalize(&self, word: &str) -> String {
        if self.lowercase {
            word.to_lowercase()
        } else {
            word.to_string()
        }
    }
}
