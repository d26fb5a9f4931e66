//! The cognitive query dialect: SQL SELECT-FROM-WHERE with token variables,
//! relation/column variables, similarity UDFs, ORDER BY and LIMIT.
//!
//! Evaluation is one row per qualifying binding of table rows. When a token
//! variable is projected or sorted on, every qualifying token binding yields
//! its own row; otherwise a row combination qualifies if some token binding
//! satisfies WHERE. Results are ordered by the ORDER BY keys, then by the
//! rendered row, before LIMIT is applied.

mod ast;
mod engine;
mod lexer;
mod parser;
mod reference;
mod result;
mod rewrite;
mod value;

use std::cmp::Ordering;

pub use ast::{ArithOp, CmpOp, Expr, Func, Literal, OrderKey, Pos, Projection, Query, TableRef};
pub use parser::parse;
pub use result::ResultTable;
pub use rewrite::rewrite_relation_vars;
pub use value::render_real;

use crate::ciops::{CiError, ClosenessScale};
use crate::textify::{Database, TextifyError, TokenizationConfig};
use crate::vecstore::VectorStore;
use value::{sort_cmp, Val};

#[derive(Debug, thiserror::Error)]
pub enum CiqlError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("undeclared identifier {name:?} at {line}:{col}")]
    Undeclared {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("constant {value} at {line}:{col} is outside [-1, 1] but compared with a cosine")]
    Range { value: f64, line: usize, col: usize },
    #[error("{0}")]
    Semantic(String),
    #[error("unknown table {0:?}")]
    UnknownTable(String),
    #[error("table {table:?} has no column {column:?}")]
    UnknownColumn { table: String, column: String },
    #[error("type error: {0}")]
    Type(String),
    #[error("cannot cast {value:?} with {target}()")]
    Cast { value: String, target: &'static str },
    #[error(
        "unbound token variable {0}: it must appear as the second argument of contains() in WHERE"
    )]
    UnboundTokenVariable(String),
    #[error("no catalog table is available for a Relation variable")]
    EmptyCatalog,
    #[error(transparent)]
    Ops(#[from] CiError),
    #[error(transparent)]
    Textify(#[from] TextifyError),
}

/// Everything a query runs against.
#[derive(Clone, Copy)]
pub struct Session<'a> {
    pub db: &'a Database,
    pub store: &'a VectorStore,
    pub config: &'a TokenizationConfig,
    pub scale: &'a ClosenessScale,
}

/// Parses and executes `text`.
pub fn run(text: &str, session: Session<'_>) -> Result<ResultTable, CiqlError> {
    execute(&parse(text)?, session)
}

/// Planned evaluation: conjunct pushdown, memoized UDF calls, cached cell
/// tokenizations and parallel outer loop.
pub fn execute(query: &Query, session: Session<'_>) -> Result<ResultTable, CiqlError> {
    evaluate(query, session, engine::collect)
}

/// Definitional evaluation: every binding is enumerated and every predicate
/// evaluated from scratch. Intended as a test oracle on small instances.
pub fn execute_reference(query: &Query, session: Session<'_>) -> Result<ResultTable, CiqlError> {
    evaluate(query, session, reference::collect)
}

type Collector = fn(&Prepared, Session<'_>) -> Result<Vec<OutRow>, CiqlError>;

fn evaluate(
    query: &Query,
    session: Session<'_>,
    collect: Collector,
) -> Result<ResultTable, CiqlError> {
    session.config.validate()?;
    session.scale.validate()?;
    let columns = labels(query, session.db)?;
    let mut rows = Vec::new();
    for concrete in rewrite_relation_vars(query, session.db)? {
        rows.extend(collect(&prepare(&concrete, session.db)?, session)?);
    }
    let descending: Vec<bool> = query.order_by.iter().map(|k| k.descending).collect();
    rows.sort_by(|a, b| {
        for (i, desc) in descending.iter().enumerate() {
            let o = sort_cmp(&a.keys[i], &b.keys[i]);
            let o = if *desc { o.reverse() } else { o };
            if o != Ordering::Equal {
                return o;
            }
        }
        a.cells.cmp(&b.cells)
    });
    if let Some(k) = query.limit {
        rows.truncate(k);
    }
    Ok(ResultTable {
        columns,
        rows: rows.into_iter().map(|r| r.cells).collect(),
    })
}

/// A rendered output row with its sort keys.
pub(crate) struct OutRow {
    pub cells: Vec<String>,
    pub keys: Vec<Val>,
}

/// A relation-variable-free query with names checked against the catalog.
pub(crate) struct Prepared {
    /// `(alias, table index)` in FROM order.
    pub slots: Vec<(String, usize)>,
    pub projections: Vec<Expr>,
    pub where_clause: Option<Expr>,
    pub order_by: Vec<Expr>,
    /// Referenced token variables with the scope of their domain.
    pub token_vars: Vec<(String, Expr)>,
    /// Whether any token variable is projected or sorted on.
    pub tokens_projected: bool,
}

fn labels(query: &Query, db: &Database) -> Result<Vec<String>, CiqlError> {
    let single = query.tables.len() == 1;
    let mut out = Vec::new();
    for p in &query.projections {
        match p {
            Projection::Expr { label: Some(l), .. } => out.push(l.clone()),
            Projection::Expr { expr, label: None } => out.push(expr.to_string()),
            Projection::Star | Projection::AliasStar(_) => {
                for t in &query.tables {
                    if matches!(p, Projection::AliasStar(a) if *a != t.alias) {
                        continue;
                    }
                    let table = db
                        .table(&t.table)
                        .ok_or_else(|| CiqlError::UnknownTable(t.table.clone()))?;
                    for c in &table.columns {
                        out.push(if single {
                            c.name.clone()
                        } else {
                            format!("{}.{}", t.alias, c.name)
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn prepare(query: &Query, db: &Database) -> Result<Prepared, CiqlError> {
    let mut slots = Vec::new();
    for t in &query.tables {
        let ti = db
            .table_index(&t.table)
            .ok_or_else(|| CiqlError::UnknownTable(t.table.clone()))?;
        slots.push((t.alias.clone(), ti));
    }
    let mut projections = Vec::new();
    for p in &query.projections {
        match p {
            Projection::Expr { expr, .. } => projections.push(expr.clone()),
            Projection::Star | Projection::AliasStar(_) => {
                for (alias, ti) in &slots {
                    if matches!(p, Projection::AliasStar(a) if a != alias) {
                        continue;
                    }
                    for c in &db.tables()[*ti].columns {
                        projections.push(Expr::Column {
                            qualifier: alias.clone(),
                            column: c.name.clone(),
                            labeled: false,
                            pos: Pos::default(),
                        });
                    }
                }
            }
        }
    }
    let order_by: Vec<Expr> = query.order_by.iter().map(|k| k.expr.clone()).collect();

    let mut check = Ok(());
    let all = projections
        .iter()
        .chain(query.where_clause.iter())
        .chain(order_by.iter());
    for e in all.clone() {
        e.walk(&mut |node| {
            if check.is_err() {
                return;
            }
            match node {
                Expr::Column {
                    qualifier, column, ..
                } => {
                    let ti = slots
                        .iter()
                        .find(|(a, _)| a == qualifier)
                        .expect("resolved qualifier")
                        .1;
                    if db.tables()[ti].column_index(column).is_none() {
                        check = Err(CiqlError::UnknownColumn {
                            table: db.tables()[ti].name.clone(),
                            column: column.clone(),
                        });
                    }
                }
                Expr::MaxCosine { table, column, .. } => match db.table(table) {
                    None => check = Err(CiqlError::UnknownTable(table.clone())),
                    Some(t) if t.column_index(column).is_none() => {
                        check = Err(CiqlError::UnknownColumn {
                            table: table.clone(),
                            column: column.clone(),
                        })
                    }
                    Some(_) => {}
                },
                _ => {}
            }
        });
    }
    check?;

    let mut referenced = Vec::new();
    let mut projected = false;
    for (i, e) in all.enumerate() {
        let in_where = query.where_clause.is_some() && i == projections.len();
        e.walk(&mut |node| {
            if let Expr::TokenVar(v) = node {
                if !referenced.contains(v) {
                    referenced.push(v.clone());
                }
                if !in_where {
                    projected = true;
                }
            }
        });
    }
    let mut token_vars = Vec::new();
    for v in query.token_vars.iter().filter(|v| referenced.contains(v)) {
        let mut scope = None;
        if let Some(w) = &query.where_clause {
            w.walk(&mut |node| {
                if let Expr::Call {
                    func: Func::Contains,
                    args,
                } = node
                {
                    if scope.is_none() && matches!(&args[1], Expr::TokenVar(t) if t == v) {
                        scope = Some(args[0].clone());
                    }
                }
            });
        }
        let scope = scope.ok_or_else(|| CiqlError::UnboundTokenVariable(v.clone()))?;
        let mut nested = false;
        scope.walk(&mut |n| nested |= matches!(n, Expr::TokenVar(_)));
        if nested {
            return Err(CiqlError::Semantic(format!(
                "the domain of {v} cannot depend on another token variable"
            )));
        }
        token_vars.push((v.clone(), scope));
    }
    Ok(Prepared {
        slots,
        projections,
        where_clause: query.where_clause.clone(),
        order_by,
        token_vars,
        tokens_projected: projected,
    })
}

/// `Table.Column:value` for cells bound through a Relation variable.
pub(crate) fn render_cell(
    expr: &Expr,
    value: &Val,
    slots: &[(String, usize)],
    db: &Database,
) -> String {
    match expr {
        Expr::Column {
            qualifier,
            column,
            labeled: true,
            ..
        } => {
            let ti = slots
                .iter()
                .find(|(a, _)| a == qualifier)
                .expect("resolved qualifier")
                .1;
            format!("{}.{}:{}", db.tables()[ti].name, column, value.render())
        }
        _ => value.render(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textify::{Column, ColumnType, Table, Value};

    fn fixture() -> (Database, VectorStore) {
        let s = |n: &str| Column::new(n, ColumnType::String);
        let row = |name: &str, color: &str, n: i64| {
            vec![
                Value::Str(name.into()),
                Value::Str(color.into()),
                Value::Int(n),
            ]
        };
        let fruit = Table::new(
            "Fruit",
            vec![s("name"), s("color"), Column::new("n", ColumnType::Integer)],
        )
        .with_rows(vec![
            row("apple", "red", 1),
            row("banana", "yellow", 2),
            row("cherry", "red", 3),
        ]);
        let shop = Table::new("Shop", vec![s("item")]).with_rows(vec![
            vec![Value::Str("apple".into())],
            vec![Value::Str("pear".into())],
        ]);
        let db = Database::new(vec![fruit, shop], vec![]).unwrap();
        let mut store = VectorStore::new(2);
        for (t, v) in [
            ("red", [1.0, 0.0]),
            ("crimson", [0.9, 0.1]),
            ("yellow", [0.0, 1.0]),
            ("apple", [1.0, 0.1]),
            ("banana", [0.1, 1.0]),
            ("cherry", [0.95, 0.05]),
            ("pear", [0.3, 0.9]),
        ] {
            store.put(t, &v).unwrap();
        }
        (db, store)
    }

    fn both(text: &str) -> ResultTable {
        let (db, store) = fixture();
        let config = TokenizationConfig::default();
        let scale = ClosenessScale::default();
        let session = Session {
            db: &db,
            store: &store,
            config: &config,
            scale: &scale,
        };
        let q = parse(text).unwrap();
        let fast = execute(&q, session).unwrap();
        assert_eq!(fast, execute_reference(&q, session).unwrap(), "{text}");
        fast
    }

    fn try_run(text: &str) -> Result<ResultTable, CiqlError> {
        let (db, store) = fixture();
        let config = TokenizationConfig::default();
        let scale = ClosenessScale::default();
        run(
            text,
            Session {
                db: &db,
                store: &store,
                config: &config,
                scale: &scale,
            },
        )
    }

    #[test]
    fn where_true_returns_every_row() {
        let r = both("SELECT * FROM Fruit WHERE TRUE");
        assert_eq!(r.columns, ["name", "color", "n"]);
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn self_join_with_inequality() {
        let r = both("SELECT A.name, B.name FROM Fruit A, Fruit B WHERE A.color = B.color AND A.name <> B.name");
        assert_eq!(r.rows, [["apple", "cherry"], ["cherry", "apple"]]);
    }

    #[test]
    fn projected_token_variable_yields_one_row_per_token() {
        let r = both(
            "SELECT F.name, e FROM Fruit F, Token e WHERE contains(F.color, e) AND cosineDistance(e, 'crimson') > 0.8",
        );
        assert_eq!(r.rows, [["apple", "red"], ["cherry", "red"]]);
    }

    #[test]
    fn existential_token_variable_yields_one_row_per_entity() {
        let r = both("SELECT F.name FROM Fruit F, Token e WHERE contains(F, e) AND cosineDistance(e, 'red') > 0.9");
        assert_eq!(r.column("F.name").unwrap(), ["apple", "cherry"]);
    }

    #[test]
    fn order_by_descending_with_limit() {
        let r = both("SELECT F.name, cosineDistance(F.name, 'red') AS s FROM Fruit F ORDER BY s DESC LIMIT 2");
        assert_eq!(r.column("F.name").unwrap(), ["cherry", "apple"]);
    }

    #[test]
    fn relation_variable_cells_are_labeled() {
        let r = both("SELECT S.X FROM Fruit F; Relation S; column X WHERE contains(S.X, 'apple') AND F.n = 1");
        assert_eq!(r.rows, [["Shop.item:apple"]]);
    }

    #[test]
    fn closeness_levels_are_nested() {
        let strict = both("SELECT F.name FROM Fruit F WHERE very_strong(F.name, 'red')");
        let loose = both("SELECT F.name FROM Fruit F WHERE moderate(F.name, 'red')");
        assert!(strict.rows.iter().all(|r| loose.rows.contains(r)));
        assert_eq!(strict.column("F.name").unwrap(), ["apple", "cherry"]);
    }

    #[test]
    fn scalar_functions_and_casts() {
        let r = both(
            "SELECT F.n * 2 + 1, real(F.n) / 2, int('7') FROM Fruit F WHERE F.n >= 2 ORDER BY F.n",
        );
        assert_eq!(r.rows, [["5", "1.00000", "7"], ["7", "1.50000", "7"]]);
    }

    #[test]
    fn unbound_token_variable_is_an_error() {
        let e = try_run("SELECT e FROM Fruit F, Token e WHERE cosineDistance(e, 'red') > 0.5")
            .unwrap_err();
        assert!(matches!(e, CiqlError::UnboundTokenVariable(v) if v == "e"));
    }

    #[test]
    fn unknown_names_are_reported() {
        assert!(matches!(
            try_run("SELECT * FROM Nope"),
            Err(CiqlError::UnknownTable(_))
        ));
        assert!(matches!(
            try_run("SELECT F.nope FROM Fruit F"),
            Err(CiqlError::UnknownColumn { .. })
        ));
    }

    #[test]
    fn oov_operand_is_null() {
        let r = both("SELECT cosineDistance(F.name, 'zebra') FROM Fruit F LIMIT 1");
        assert_eq!(r.rows, [["NULL"]]);
    }
}
