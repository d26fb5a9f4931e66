//! Relational catalog: typed tables, rows and foreign keys.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::TextifyError;

/// Declared type of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Char,
    String,
    Boolean,
    Integer,
    Real,
}

impl ColumnType {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "char" | "character" => Some(Self::Char),
            "string" | "text" | "varchar" => Some(Self::String),
            "boolean" | "bool" => Some(Self::Boolean),
            "integer" | "int" => Some(Self::Integer),
            "real" | "float" | "double" => Some(Self::Real),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Char => "char",
            Self::String => "string",
            Self::Boolean => "boolean",
            Self::Integer => "integer",
            Self::Real => "real",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
    pub nullable: bool,
}

impl Column {
    pub fn new(name: impl Into<String>, ty: ColumnType) -> Self {
        Self {
            name: name.into(),
            ty,
            nullable: false,
        }
    }

    pub fn nullable(mut self) -> Self {
        self.nullable = true;
        self
    }
}

/// A typed cell value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Null,
    Char(char),
    Str(String),
    Bool(bool),
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn conforms_to(&self, column: &Column) -> bool {
        match (self, column.ty) {
            (Value::Null, _) => column.nullable,
            (Value::Char(_), ColumnType::Char) => true,
            (Value::Str(_), ColumnType::String) => true,
            (Value::Bool(_), ColumnType::Boolean) => true,
            (Value::Int(_), ColumnType::Integer) => true,
            (Value::Real(x), ColumnType::Real) => x.is_finite(),
            _ => false,
        }
    }

    /// Key used to match foreign-key values against primary keys, independent
    /// of whether the two sides were declared with the same type.
    pub(crate) fn key_text(&self) -> Option<String> {
        match self {
            Value::Null => None,
            other => Some(other.to_string()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("Null"),
            Value::Char(c) => write!(f, "{c}"),
            Value::Str(s) => f.write_str(s),
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    /// Column names forming the primary key; empty when the table has none.
    #[serde(default)]
    pub primary_key: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Self {
        Self {
            name: name.into(),
            columns,
            primary_key: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn with_primary_key<S: Into<String>>(mut self, cols: impl IntoIterator<Item = S>) -> Self {
        self.primary_key = cols.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_rows(mut self, rows: Vec<Vec<Value>>) -> Self {
        self.rows = rows;
        self
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn primary_key_indices(&self) -> Vec<usize> {
        self.primary_key
            .iter()
            .filter_map(|c| self.column_index(c))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForeignKey {
    pub source_table: String,
    pub source_columns: Vec<String>,
    pub target_table: String,
}

impl ForeignKey {
    pub fn new<S: Into<String>>(
        source_table: impl Into<String>,
        source_columns: impl IntoIterator<Item = S>,
        target_table: impl Into<String>,
    ) -> Self {
        Self {
            source_table: source_table.into(),
            source_columns: source_columns.into_iter().map(Into::into).collect(),
            target_table: target_table.into(),
        }
    }
}

/// A validated collection of tables plus foreign keys between them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Database {
    tables: Vec<Table>,
    foreign_keys: Vec<ForeignKey>,
}

impl Database {
    /// Builds a database, checking row arity, value types, foreign-key
    /// targets and primary-key uniqueness.
    pub fn new(tables: Vec<Table>, foreign_keys: Vec<ForeignKey>) -> Result<Self, TextifyError> {
        let db = Self {
            tables,
            foreign_keys,
        };
        db.validate()?;
        Ok(db)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn foreign_keys(&self) -> &[ForeignKey] {
        &self.foreign_keys
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.name == name)
    }

    /// Appends rows to an existing table (or adds the table), revalidating.
    /// Returns the index range of the appended rows.
    pub fn append(&mut self, table: Table) -> Result<std::ops::Range<usize>, TextifyError> {
        let range = match self.table_index(&table.name) {
            Some(i) => {
                let existing = &mut self.tables[i];
                if existing.columns != table.columns {
                    return Err(TextifyError::Schema(format!(
                        "appended rows for `{}` use a different column layout",
                        table.name
                    )));
                }
                let start = existing.rows.len();
                existing.rows.extend(table.rows);
                start..existing.rows.len()
            }
            None => {
                let n = table.rows.len();
                self.tables.push(table);
                0..n
            }
        };
        self.validate()?;
        Ok(range)
    }

    pub fn add_foreign_key(&mut self, fk: ForeignKey) -> Result<(), TextifyError> {
        self.foreign_keys.push(fk);
        if let Err(e) = self.validate() {
            self.foreign_keys.pop();
            return Err(e);
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), TextifyError> {
        let mut seen = HashMap::new();
        for (ti, table) in self.tables.iter().enumerate() {
            if seen.insert(table.name.as_str(), ti).is_some() {
                return Err(TextifyError::Schema(format!(
                    "duplicate table `{}`",
                    table.name
                )));
            }
            for (ri, row) in table.rows.iter().enumerate() {
                if row.len() != table.columns.len() {
                    return Err(TextifyError::Arity {
                        table: table.name.clone(),
                        row: ri,
                        expected: table.columns.len(),
                        found: row.len(),
                    });
                }
                for (value, column) in row.iter().zip(&table.columns) {
                    if !value.conforms_to(column) {
                        return Err(TextifyError::TypeMismatch {
                            table: table.name.clone(),
                            row: ri,
                            column: column.name.clone(),
                            expected: column.ty.name(),
                        });
                    }
                }
            }
            for key in &table.primary_key {
                if table.column_index(key).is_none() {
                    return Err(TextifyError::Schema(format!(
                        "primary key column `{key}` missing from `{}`",
                        table.name
                    )));
                }
            }
            if !table.primary_key.is_empty() {
                let idx = table.primary_key_indices();
                let mut keys = HashMap::new();
                for (ri, row) in table.rows.iter().enumerate() {
                    let key: Vec<String> = idx.iter().map(|&i| row[i].to_string()).collect();
                    if let Some(first) = keys.insert(key.clone(), ri) {
                        return Err(TextifyError::DuplicateKey {
                            table: table.name.clone(),
                            key: key.join(","),
                            rows: (first, ri),
                        });
                    }
                }
            }
        }
        for fk in &self.foreign_keys {
            let source = self.table(&fk.source_table).ok_or_else(|| {
                TextifyError::Schema(format!(
                    "foreign key source table `{}` does not exist",
                    fk.source_table
                ))
            })?;
            for col in &fk.source_columns {
                if source.column_index(col).is_none() {
                    return Err(TextifyError::Schema(format!(
                        "foreign key column `{}.{col}` does not exist",
                        fk.source_table
                    )));
                }
            }
            let target = self.table(&fk.target_table).ok_or_else(|| {
                TextifyError::Schema(format!(
                    "foreign key target table `{}` does not exist",
                    fk.target_table
                ))
            })?;
            if target.primary_key.len() != fk.source_columns.len() || fk.source_columns.is_empty() {
                return Err(TextifyError::Schema(format!(
                    "foreign key {}({}) does not match the primary key of `{}`",
                    fk.source_table,
                    fk.source_columns.join(","),
                    fk.target_table
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn people() -> Table {
        Table::new(
            "people",
            vec![
                Column::new("id", ColumnType::Integer),
                Column::new("name", ColumnType::String),
            ],
        )
        .with_primary_key(["id"])
    }

    #[test]
    fn rejects_wrong_arity() {
        let t = people().with_rows(vec![vec![Value::Int(1)]]);
        assert!(matches!(
            Database::new(vec![t], vec![]),
            Err(TextifyError::Arity { .. })
        ));
    }

    #[test]
    fn rejects_duplicate_primary_key() {
        let t = people().with_rows(vec![
            vec![Value::Int(1), Value::Str("a".into())],
            vec![Value::Int(1), Value::Str("b".into())],
        ]);
        assert!(matches!(
            Database::new(vec![t], vec![]),
            Err(TextifyError::DuplicateKey { .. })
        ));
    }

    #[test]
    fn rejects_fk_to_missing_table() {
        let fk = ForeignKey::new("people", ["id"], "nowhere");
        assert!(Database::new(vec![people()], vec![fk]).is_err());
    }

    #[test]
    fn null_needs_nullable_column() {
        let t = people().with_rows(vec![vec![Value::Int(1), Value::Null]]);
        assert!(Database::new(vec![t], vec![]).is_err());
    }

    #[test]
    fn non_finite_reals_rejected() {
        let t = Table::new("m", vec![Column::new("x", ColumnType::Real)])
            .with_rows(vec![vec![Value::Real(f64::NAN)]]);
        assert!(Database::new(vec![t], vec![]).is_err());
    }
}
