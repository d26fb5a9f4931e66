use std::collections::HashMap;
use std::sync::Mutex;

use super::number::{canonical_literal, designator_for_literal};
use super::{
    Column, Database, Document, FieldPrefix, FkExpansion, Provenance, Table, TextifyError,
    TokenizationConfig, Value,
};

/// Tokens for a single value, using only the column name to decide phrase
/// joining.
pub fn tokenize_value(value: &Value, column: &Column, config: &TokenizationConfig) -> Vec<String> {
    field_tokens("", value, column, config)
}

/// Like [`tokenize_value`], also honouring `table.column` phrase settings.
pub fn tokenize_value_in(
    table: &str,
    value: &Value,
    column: &Column,
    config: &TokenizationConfig,
) -> Vec<String> {
    field_tokens(table, value, column, config)
}

pub fn tokenize_row(
    table: &str,
    row: usize,
    db: &Database,
    config: &TokenizationConfig,
    hop_budget: u32,
) -> Result<Vec<String>, TextifyError> {
    Tokenizer::new(db, config)?.row(table, row, hop_budget)
}

pub fn tokenize_database(
    db: &Database,
    config: &TokenizationConfig,
    table_order: Option<&[String]>,
) -> Result<Document, TextifyError> {
    Tokenizer::new(db, config)?.database(table_order)
}

/// Column-name and relation-name tokens: the raw name with delimiters
/// replaced by underscores.
pub fn name_token(name: &str, config: &TokenizationConfig) -> String {
    name.chars()
        .map(|c| if config.is_delimiter(c) { '_' } else { c })
        .collect()
}

fn value_tokens(
    table: &str,
    value: &Value,
    column: &Column,
    config: &TokenizationConfig,
) -> Vec<String> {
    let number = |literal: String| {
        if config.range_designators {
            vec![designator_for_literal(&literal, config), literal]
        } else {
            vec![literal]
        }
    };
    match value {
        Value::Null => vec!["Null".to_string()],
        Value::Bool(true) => vec!["TRUE".to_string()],
        Value::Bool(false) => vec!["FALSE".to_string()],
        Value::Char(c) if config.is_delimiter(*c) => Vec::new(),
        Value::Char(c) => vec![config.normalize(&c.to_string())],
        Value::Int(i) => number(i.to_string()),
        Value::Real(x) => number(canonical_literal(*x)),
        Value::Str(s) => {
            let words = config.split_text(s);
            if config.joins_phrases(table, &column.name) && words.len() > 1 {
                vec![words.join("_")]
            } else {
                words
            }
        }
    }
}

fn field_tokens(
    table: &str,
    value: &Value,
    column: &Column,
    config: &TokenizationConfig,
) -> Vec<String> {
    let values = value_tokens(table, value, column, config);
    if values.is_empty() {
        return values;
    }
    let name = name_token(&column.name, config);
    match config.field_prefix {
        FieldPrefix::None => values,
        FieldPrefix::OncePerField => std::iter::once(name).chain(values).collect(),
        FieldPrefix::PerToken => values.into_iter().flat_map(|v| [name.clone(), v]).collect(),
    }
}

struct FkLink {
    source_columns: Vec<usize>,
    target: usize,
    /// Column after which inline expansions are inserted.
    anchor: usize,
}

/// Reusable tokenizer holding primary-key indexes for foreign-key lookups.
pub struct Tokenizer<'a> {
    db: &'a Database,
    config: &'a TokenizationConfig,
    key_index: Vec<HashMap<Vec<String>, usize>>,
    links: Vec<Vec<FkLink>>,
    interest: Vec<Vec<usize>>,
    warnings: Mutex<Vec<String>>,
}

impl<'a> Tokenizer<'a> {
    pub fn new(db: &'a Database, config: &'a TokenizationConfig) -> Result<Self, TextifyError> {
        config.validate()?;
        let tables = db.tables();
        let key_index = tables
            .iter()
            .map(|t| {
                let idx = t.primary_key_indices();
                if idx.is_empty() {
                    return HashMap::new();
                }
                t.rows
                    .iter()
                    .enumerate()
                    .map(|(ri, row)| (idx.iter().map(|&i| row[i].to_string()).collect(), ri))
                    .collect()
            })
            .collect();
        let mut links: Vec<Vec<FkLink>> = tables.iter().map(|_| Vec::new()).collect();
        for fk in db.foreign_keys() {
            let source = db
                .table_index(&fk.source_table)
                .expect("validated foreign key");
            let target = db
                .table_index(&fk.target_table)
                .expect("validated foreign key");
            let cols: Vec<usize> = fk
                .source_columns
                .iter()
                .map(|c| {
                    tables[source]
                        .column_index(c)
                        .expect("validated foreign key")
                })
                .collect();
            let anchor = *cols.iter().max().expect("non-empty foreign key");
            links[source].push(FkLink {
                source_columns: cols,
                target,
                anchor,
            });
        }
        let mut interest = Vec::with_capacity(tables.len());
        for t in tables {
            let cols = match config.fk_columns.get(&t.name) {
                Some(names) => names
                    .iter()
                    .map(|n| {
                        t.column_index(n)
                            .ok_or_else(|| TextifyError::UnknownColumn {
                                table: t.name.clone(),
                                column: n.clone(),
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                None => {
                    let pk = t.primary_key_indices();
                    (0..t.columns.len()).filter(|i| !pk.contains(i)).collect()
                }
            };
            interest.push(cols);
        }
        Ok(Self {
            db,
            config,
            key_index,
            links,
            interest,
            warnings: Mutex::new(Vec::new()),
        })
    }

    /// Dangling foreign-key references skipped so far.
    pub fn warnings(&self) -> Vec<String> {
        self.warnings.lock().expect("warnings lock").clone()
    }

    pub fn row(
        &self,
        table: &str,
        row: usize,
        hop_budget: u32,
    ) -> Result<Vec<String>, TextifyError> {
        Ok(self.row_with_provenance(table, row, hop_budget)?.0)
    }

    pub fn row_with_provenance(
        &self,
        table: &str,
        row: usize,
        hop_budget: u32,
    ) -> Result<(Vec<String>, Vec<Provenance>), TextifyError> {
        if hop_budget > self.config.max_hops {
            return Err(TextifyError::Config(format!(
                "hop budget {hop_budget} exceeds max_hops {}",
                self.config.max_hops
            )));
        }
        let ti = self
            .db
            .table_index(table)
            .ok_or_else(|| TextifyError::UnknownTable(table.to_string()))?;
        if row >= self.db.tables()[ti].rows.len() {
            return Err(TextifyError::RowOutOfRange {
                table: table.to_string(),
                row,
            });
        }
        let mut tokens = Vec::new();
        let mut prov = Vec::new();
        self.emit_row(ti, row, hop_budget, None, &mut tokens, &mut prov)?;
        Ok((tokens, prov))
    }

    /// Tokens of a single cell, honouring `table.column` phrase settings.
    pub fn cell(&self, table: &Table, row: usize, column: usize) -> Vec<String> {
        field_tokens(
            &table.name,
            &table.rows[row][column],
            &table.columns[column],
            self.config,
        )
    }

    pub fn database(&self, table_order: Option<&[String]>) -> Result<Document, TextifyError> {
        let order: Vec<usize> = match table_order {
            Some(names) => names
                .iter()
                .map(|n| {
                    self.db
                        .table_index(n)
                        .ok_or_else(|| TextifyError::UnknownTable(n.clone()))
                })
                .collect::<Result<_, _>>()?,
            None => (0..self.db.tables().len()).collect(),
        };
        let mut doc = Document::with_provenance();
        for ti in order {
            for ri in 0..self.db.tables()[ti].rows.len() {
                let mut tokens = Vec::new();
                let mut prov = Vec::new();
                self.emit_row(ti, ri, self.config.max_hops, None, &mut tokens, &mut prov)?;
                doc.push_sentence(tokens, Some(prov));
            }
        }
        Ok(doc)
    }

    fn emit_row(
        &self,
        ti: usize,
        ri: usize,
        budget: u32,
        columns: Option<&[usize]>,
        tokens: &mut Vec<String>,
        prov: &mut Vec<Provenance>,
    ) -> Result<(), TextifyError> {
        let table = &self.db.tables()[ti];
        let here = |column: Option<&str>| Provenance {
            table: table.name.clone(),
            row: ri,
            column: column.map(str::to_string),
        };
        if self.config.relation_prefix {
            tokens.push(name_token(&table.name, self.config));
            prov.push(here(None));
        }
        let expand = self.config.fk_expansion != FkExpansion::Off && budget > 0;
        let mut deferred = Vec::new();
        for (ci, column) in table.columns.iter().enumerate() {
            if columns.is_none_or(|sel| sel.contains(&ci)) {
                let field = self.cell(table, ri, ci);
                prov.extend(std::iter::repeat_n(here(Some(&column.name)), field.len()));
                tokens.extend(field);
            }
            if !expand {
                continue;
            }
            for link in self.links[ti].iter().filter(|l| l.anchor == ci) {
                let Some(target_row) = self.follow(table, ri, link)? else {
                    continue;
                };
                match self.config.fk_expansion {
                    FkExpansion::Inline => {
                        self.emit_referenced(link.target, target_row, budget, tokens, prov)?
                    }
                    _ => deferred.push((link.target, target_row)),
                }
            }
        }
        for (target, target_row) in deferred {
            self.emit_referenced(target, target_row, budget, tokens, prov)?;
        }
        Ok(())
    }

    fn emit_referenced(
        &self,
        target: usize,
        row: usize,
        budget: u32,
        tokens: &mut Vec<String>,
        prov: &mut Vec<Provenance>,
    ) -> Result<(), TextifyError> {
        self.emit_row(
            target,
            row,
            budget - 1,
            Some(&self.interest[target]),
            tokens,
            prov,
        )
    }

    fn follow(
        &self,
        table: &Table,
        ri: usize,
        link: &FkLink,
    ) -> Result<Option<usize>, TextifyError> {
        let row = &table.rows[ri];
        let mut key = Vec::with_capacity(link.source_columns.len());
        for &c in &link.source_columns {
            match row[c].key_text() {
                Some(k) => key.push(k),
                None => return Ok(None),
            }
        }
        if let Some(&target_row) = self.key_index[link.target].get(&key) {
            return Ok(Some(target_row));
        }
        let target = &self.db.tables()[link.target].name;
        if self.config.strict_foreign_keys {
            return Err(TextifyError::DanglingForeignKey {
                table: table.name.clone(),
                row: ri,
                target: target.clone(),
                key: key.join(","),
            });
        }
        let msg = format!(
            "{} row {ri}: no `{target}` row with key ({})",
            table.name,
            key.join(",")
        );
        log::warn!("dangling foreign key: {msg}");
        self.warnings.lock().expect("warnings lock").push(msg);
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textify::{ColumnType, ForeignKey};

    fn emp_db() -> Database {
        let emp = Table::new(
            "emp",
            vec![
                Column::new("empNum", ColumnType::Integer),
                Column::new("firstName", ColumnType::String),
                Column::new("jobDesc", ColumnType::String),
            ],
        )
        .with_primary_key(["empNum"])
        .with_rows(vec![vec![
            Value::Int(119),
            Value::Str("John".into()),
            Value::Str("manager multimedia".into()),
        ]]);
        let address = Table::new(
            "address",
            vec![
                Column::new("id", ColumnType::Integer),
                Column::new("city", ColumnType::String),
            ],
        )
        .with_primary_key(["id"])
        .with_rows(vec![vec![Value::Int(119), Value::Str("Mamaroneck".into())]]);
        Database::new(
            vec![emp, address],
            vec![ForeignKey::new("emp", ["empNum"], "address")],
        )
        .unwrap()
    }

    #[test]
    fn basic_values() {
        let c = TokenizationConfig::default();
        let col = Column::new("x", ColumnType::Boolean);
        assert_eq!(tokenize_value(&Value::Bool(true), &col, &c), ["TRUE"]);
        assert_eq!(tokenize_value(&Value::Bool(false), &col, &c), ["FALSE"]);
        assert_eq!(
            tokenize_value(&Value::Null, &col.clone().nullable(), &c),
            ["Null"]
        );
        assert_eq!(
            tokenize_value(&Value::Char('y'), &Column::new("c", ColumnType::Char), &c),
            ["y"]
        );
        assert_eq!(
            tokenize_value(&Value::Int(12), &Column::new("n", ColumnType::Integer), &c),
            ["12"]
        );
        assert_eq!(
            tokenize_value(
                &Value::Real(123.001),
                &Column::new("r", ColumnType::Real),
                &c
            ),
            ["123.001"]
        );
    }

    #[test]
    fn strings_split_or_join() {
        let col = Column::new("title", ColumnType::String);
        let mut c = TokenizationConfig::default();
        assert_eq!(
            tokenize_value(&Value::Str("Deep Learning".into()), &col, &c),
            ["Deep", "Learning"]
        );
        assert!(tokenize_value(&Value::Str(String::new()), &col, &c).is_empty());
        c.phrase_join = true;
        assert_eq!(
            tokenize_value(&Value::Str("Deep Learning".into()), &col, &c),
            ["Deep_Learning"]
        );
        c.phrase_join = false;
        c.split_delimiters = vec![','];
        assert_eq!(
            tokenize_value(&Value::Str("a,b c".into()), &col, &c),
            ["a", "b", "c"]
        );
    }

    #[test]
    fn field_prefix_modes() {
        let col = Column::new("jobDesc", ColumnType::String);
        let v = Value::Str("manager multimedia".into());
        let mut c = TokenizationConfig {
            field_prefix: FieldPrefix::PerToken,
            ..Default::default()
        };
        assert_eq!(
            tokenize_value(&v, &col, &c),
            ["jobDesc", "manager", "jobDesc", "multimedia"]
        );
        c.field_prefix = FieldPrefix::OncePerField;
        assert_eq!(
            tokenize_value(&v, &col, &c),
            ["jobDesc", "manager", "multimedia"]
        );
    }

    #[test]
    fn designators_are_prefixed_per_token() {
        let c = TokenizationConfig {
            field_prefix: FieldPrefix::PerToken,
            range_designators: true,
            ..Default::default()
        };
        let col = Column::new("salary", ColumnType::Real);
        assert_eq!(
            tokenize_value(&Value::Real(78.5), &col, &c),
            ["salary", "50-99", "salary", "78.5"]
        );
    }

    #[test]
    fn fk_after_row_and_inline() {
        let db = emp_db();
        let mut c = TokenizationConfig {
            fk_expansion: FkExpansion::AfterRow,
            ..Default::default()
        };
        assert_eq!(
            tokenize_row("emp", 0, &db, &c, 1).unwrap(),
            ["119", "John", "manager", "multimedia", "Mamaroneck"]
        );
        c.fk_expansion = FkExpansion::Inline;
        assert_eq!(
            tokenize_row("emp", 0, &db, &c, 1).unwrap(),
            ["119", "Mamaroneck", "John", "manager", "multimedia"]
        );
        assert_eq!(tokenize_row("emp", 0, &db, &c, 0).unwrap().len(), 4);
    }

    #[test]
    fn hop_budget_above_max_is_rejected() {
        let db = emp_db();
        let c = TokenizationConfig {
            max_hops: 1,
            ..Default::default()
        };
        assert!(tokenize_row("emp", 0, &db, &c, 2).is_err());
    }

    #[test]
    fn dangling_fk_warns_or_errors() {
        let mut db = emp_db();
        let extra = Table::new(
            "emp",
            vec![
                Column::new("empNum", ColumnType::Integer),
                Column::new("firstName", ColumnType::String),
                Column::new("jobDesc", ColumnType::String),
            ],
        )
        .with_primary_key(["empNum"])
        .with_rows(vec![vec![
            Value::Int(7),
            Value::Str("Ann".into()),
            Value::Str("clerk".into()),
        ]]);
        db.append(extra).unwrap();
        let mut c = TokenizationConfig {
            fk_expansion: FkExpansion::AfterRow,
            ..Default::default()
        };
        let tok = Tokenizer::new(&db, &c).unwrap();
        assert_eq!(tok.row("emp", 1, 1).unwrap(), ["7", "Ann", "clerk"]);
        assert_eq!(tok.warnings().len(), 1);
        c.strict_foreign_keys = true;
        assert!(matches!(
            tokenize_row("emp", 1, &db, &c, 1),
            Err(TextifyError::DanglingForeignKey { .. })
        ));
    }

    #[test]
    fn relation_prefix_once_per_row() {
        let db = emp_db();
        let c = TokenizationConfig {
            relation_prefix: true,
            field_prefix: FieldPrefix::OncePerField,
            ..Default::default()
        };
        assert_eq!(
            tokenize_row("address", 0, &db, &c, 0).unwrap(),
            ["address", "id", "119", "city", "Mamaroneck"]
        );
    }

    #[test]
    fn unknown_table_in_order() {
        let db = emp_db();
        let order = vec!["nope".to_string()];
        assert!(matches!(
            tokenize_database(&db, &TokenizationConfig::default(), Some(&order)),
            Err(TextifyError::UnknownTable(_))
        ));
    }

    #[test]
    fn database_concatenates_rows() {
        let db = emp_db();
        let c = TokenizationConfig::default();
        let doc = tokenize_database(&db, &c, None).unwrap();
        let mut want = tokenize_row("emp", 0, &db, &c, 1).unwrap();
        want.extend(tokenize_row("address", 0, &db, &c, 1).unwrap());
        assert_eq!(doc.tokens(), &want[..]);
        assert_eq!(doc.sentence_count(), 2);
        assert_eq!(doc.provenance().unwrap().len(), doc.len());
    }
}
