//! Turning relational tables into token sequences.
//!
//! Every value becomes one or more tokens (`TRUE`, `Null`, `12`,
//! `Deep_Learning`, ...), a row is the concatenation of its fields, and a
//! database is the concatenation of its tables. [`TokenizationConfig`] covers
//! the variants: column-name prefixes, relation-name prefixes, phrase
//! joining, numeric range designators and foreign-key expansion.

mod config;
mod document;
mod ingest;
mod number;
mod schema;
mod tokenizer;

pub use config::{FieldPrefix, FkExpansion, TokenizationConfig};
pub use document::{Document, Provenance};
pub use ingest::{foreign_key_report, Schema};
pub use number::{canonical_literal, designator_interval, encode_number};
pub use schema::{Column, ColumnType, Database, ForeignKey, Table, Value};
pub use tokenizer::{
    name_token, tokenize_database, tokenize_row, tokenize_value, tokenize_value_in, Tokenizer,
};

#[derive(Debug, thiserror::Error)]
pub enum TextifyError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid tokenization config: {0}")]
    Config(String),
    #[error("table `{table}` row {row}: expected {expected} values, found {found}")]
    Arity {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("table `{table}` row {row}: column `{column}` does not hold a valid {expected}")]
    TypeMismatch {
        table: String,
        row: usize,
        column: String,
        expected: &'static str,
    },
    #[error("table `{table}` row {row}, column \"{column}\": cannot read {value:?} as {expected}")]
    Coercion {
        table: String,
        row: usize,
        column: String,
        value: String,
        expected: &'static str,
    },
    #[error("table `{table}`: duplicate primary key ({key}) in rows {} and {}", rows.0, rows.1)]
    DuplicateKey {
        table: String,
        key: String,
        rows: (usize, usize),
    },
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown column `{table}.{column}`")]
    UnknownColumn { table: String, column: String },
    #[error("table `{table}` has no row {row}")]
    RowOutOfRange { table: String, row: usize },
    #[error("table `{table}` row {row}: foreign key ({key}) has no matching row in `{target}`")]
    DanglingForeignKey {
        table: String,
        row: usize,
        target: String,
        key: String,
    },
    #[error("cannot encode non-finite number {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
