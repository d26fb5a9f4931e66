//! CSV ingestion driven by a flat `key = value` schema file.
//!
//! ```text
//! # column types; undeclared columns are strings, `?` marks nullable
//! type.emp.empNum = integer
//! type.emp.salary = real?
//! pk.emp = empNum
//! fk.sales.authorizedBy = emp
//! # value rewritten at ingest from other fields of the same row
//! template.papers.Conference = {Conference} {Year}
//! ```

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use super::{Column, ColumnType, Database, ForeignKey, Table, TextifyError, Value};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schema {
    types: BTreeMap<(String, String), (ColumnType, bool)>,
    primary_keys: BTreeMap<String, Vec<String>>,
    foreign_keys: Vec<ForeignKey>,
    templates: BTreeMap<(String, String), String>,
}

fn split_key(key: &str, parts: usize) -> Option<Vec<&str>> {
    let v: Vec<&str> = key.splitn(parts, '.').collect();
    (v.len() == parts && v.iter().all(|p| !p.is_empty())).then_some(v)
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

impl Schema {
    pub fn parse(text: &str) -> Result<Self, TextifyError> {
        let mut schema = Schema::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| TextifyError::Schema(format!("schema line {}: {msg}", n + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let (kind, rest) = key.split_once('.').ok_or_else(|| bad("unknown key"))?;
            match kind {
                "type" => {
                    let p =
                        split_key(rest, 2).ok_or_else(|| bad("expected type.<table>.<column>"))?;
                    let (name, nullable) = match value.strip_suffix('?') {
                        Some(v) => (v.trim(), true),
                        None => (value, false),
                    };
                    let ty = ColumnType::parse(name)
                        .ok_or_else(|| bad(&format!("unknown type `{name}`")))?;
                    schema
                        .types
                        .insert((p[0].to_string(), p[1].to_string()), (ty, nullable));
                }
                "pk" => {
                    schema.primary_keys.insert(rest.to_string(), list(value));
                }
                "fk" => {
                    let p =
                        split_key(rest, 2).ok_or_else(|| bad("expected fk.<table>.<column>"))?;
                    schema
                        .foreign_keys
                        .push(ForeignKey::new(p[0], list(p[1]), value));
                }
                "template" => {
                    let p = split_key(rest, 2)
                        .ok_or_else(|| bad("expected template.<table>.<column>"))?;
                    schema
                        .templates
                        .insert((p[0].to_string(), p[1].to_string()), value.to_string());
                }
                other => return Err(bad(&format!("unknown key kind `{other}`"))),
            }
        }
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self, TextifyError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn foreign_keys(&self) -> &[ForeignKey] {
        &self.foreign_keys
    }

    /// Reads one CSV table. Row numbers in errors count data rows from 1.
    pub fn read_table<R: Read>(&self, name: &str, input: R) -> Result<Table, TextifyError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header: Vec<String> = reader
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        for (t, c) in self.types.keys().chain(self.templates.keys()) {
            if t == name && !header.contains(c) {
                return Err(TextifyError::UnknownColumn {
                    table: name.to_string(),
                    column: c.clone(),
                });
            }
        }
        let columns: Vec<Column> = header
            .iter()
            .map(|h| {
                let (ty, nullable) = self
                    .types
                    .get(&(name.to_string(), h.clone()))
                    .copied()
                    .unwrap_or((ColumnType::String, false));
                Column {
                    name: h.clone(),
                    ty,
                    nullable,
                }
            })
            .collect();
        let templates: Vec<Option<&String>> = header
            .iter()
            .map(|h| self.templates.get(&(name.to_string(), h.clone())))
            .collect();
        let mut rows = Vec::new();
        for (ri, record) in reader.records().enumerate() {
            let record = record?;
            let row_no = ri + 1;
            if record.len() != columns.len() {
                return Err(TextifyError::Arity {
                    table: name.to_string(),
                    row: row_no,
                    expected: columns.len(),
                    found: record.len(),
                });
            }
            let raw: Vec<&str> = record.iter().collect();
            let mut row = Vec::with_capacity(columns.len());
            for (ci, column) in columns.iter().enumerate() {
                let text = match templates[ci] {
                    Some(t) => render_template(t, &header, &raw),
                    None => raw[ci].to_string(),
                };
                row.push(coerce(&text, column).ok_or_else(|| TextifyError::Coercion {
                    table: name.to_string(),
                    row: row_no,
                    column: column.name.clone(),
                    value: text.clone(),
                    expected: column.ty.name(),
                })?);
            }
            rows.push(row);
        }
        let mut table = Table::new(name, columns).with_rows(rows);
        if let Some(pk) = self.primary_keys.get(name) {
            table.primary_key = pk.clone();
        }
        Ok(table)
    }

    /// Reads every `(table, path)` pair and applies the schema's foreign keys
    /// whose tables are all present.
    pub fn ingest(
        &self,
        sources: &[(String, std::path::PathBuf)],
    ) -> Result<Database, TextifyError> {
        let mut tables = Vec::with_capacity(sources.len());
        for (name, path) in sources {
            let file = std::fs::File::open(path)?;
            tables.push(self.read_table(name, file)?);
        }
        self.assemble(tables)
    }

    pub fn assemble(&self, tables: Vec<Table>) -> Result<Database, TextifyError> {
        let present = |n: &str| tables.iter().any(|t| t.name == n);
        let fks = self
            .foreign_keys
            .iter()
            .filter(|fk| present(&fk.source_table) && present(&fk.target_table))
            .cloned()
            .collect();
        Database::new(tables, fks)
    }
}

fn render_template(template: &str, header: &[String], raw: &[&str]) -> String {
    let mut out = template.to_string();
    for (h, v) in header.iter().zip(raw) {
        out = out.replace(&format!("{{{h}}}"), v);
    }
    out
}

fn coerce(text: &str, column: &Column) -> Option<Value> {
    let trimmed = text.trim();
    if trimmed.is_empty() && column.nullable {
        return Some(Value::Null);
    }
    match column.ty {
        ColumnType::String => Some(Value::Str(text.to_string())),
        ColumnType::Char => {
            let mut chars = text.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Some(Value::Char(c)),
                _ => None,
            }
        }
        ColumnType::Boolean => match trimmed.to_ascii_lowercase().as_str() {
            "true" | "t" | "yes" | "1" => Some(Value::Bool(true)),
            "false" | "f" | "no" | "0" => Some(Value::Bool(false)),
            _ => None,
        },
        ColumnType::Integer => trimmed.parse().ok().map(Value::Int),
        ColumnType::Real => trimmed
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::Real),
    }
}

/// Foreign-key references in `db` whose target row is missing.
pub fn foreign_key_report(db: &Database) -> Vec<String> {
    let mut problems = Vec::new();
    for fk in db.foreign_keys() {
        let (Some(source), Some(target)) = (db.table(&fk.source_table), db.table(&fk.target_table))
        else {
            continue;
        };
        let pk = target.primary_key_indices();
        let keys: std::collections::HashSet<Vec<String>> = target
            .rows
            .iter()
            .map(|r| pk.iter().map(|&i| r[i].to_string()).collect())
            .collect();
        let cols: Vec<usize> = fk
            .source_columns
            .iter()
            .filter_map(|c| source.column_index(c))
            .collect();
        for (ri, row) in source.rows.iter().enumerate() {
            let key: Option<Vec<String>> = cols.iter().map(|&c| row[c].key_text()).collect();
            if let Some(key) = key {
                if !keys.contains(&key) {
                    problems.push(format!(
                        "{}.{} row {}: no `{}` row with key ({})",
                        fk.source_table,
                        fk.source_columns.join(","),
                        ri + 1,
                        fk.target_table,
                        key.join(",")
                    ));
                }
            }
        }
    }
    problems
}
