//! Relation/column variable elimination by substitution.

use std::collections::BTreeMap;

use super::ast::{Expr, Projection, Query, TableRef};
use super::CiqlError;
use crate::textify::{ColumnType, Database};

fn exprs_mut(q: &mut Query) -> impl Iterator<Item = &mut Expr> {
    q.projections
        .iter_mut()
        .filter_map(|p| match p {
            Projection::Expr { expr, .. } => Some(expr),
            _ => None,
        })
        .chain(q.where_clause.iter_mut())
        .chain(q.order_by.iter_mut().map(|k| &mut k.expr))
}

fn exprs(q: &Query) -> impl Iterator<Item = &Expr> {
    q.projections
        .iter()
        .filter_map(|p| match p {
            Projection::Expr { expr, .. } => Some(expr),
            _ => None,
        })
        .chain(q.where_clause.iter())
        .chain(q.order_by.iter().map(|k| &k.expr))
}

/// One concrete query per assignment of every referenced Relation variable
/// to a catalog table outside FROM and of each of its column variables to a
/// string column of that table. The query's result is the union of the
/// results of the rewrites.
pub fn rewrite_relation_vars(query: &Query, catalog: &Database) -> Result<Vec<Query>, CiqlError> {
    // relation variable -> its column variables, in first-use order
    let mut usage: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    let mut referenced: Vec<&str> = Vec::new();
    let mut err = None;
    for e in exprs(query) {
        e.walk(&mut |node| match node {
            Expr::Column {
                qualifier, column, ..
            } if query.relation_vars.contains(qualifier) => {
                if !referenced.contains(&qualifier.as_str()) {
                    referenced.push(qualifier);
                }
                match owner.get(column.as_str()) {
                    Some(o) if *o != qualifier.as_str() => {
                        err.get_or_insert(CiqlError::Semantic(format!(
                            "column variable {column} qualifies both {o} and {qualifier}"
                        )));
                    }
                    Some(_) => {}
                    None => {
                        owner.insert(column, qualifier);
                        usage.entry(qualifier).or_default().push(column);
                    }
                }
            }
            Expr::Row(alias)
                if query.relation_vars.contains(alias) && !referenced.contains(&alias.as_str()) =>
            {
                referenced.push(alias);
            }
            _ => {}
        });
    }
    for p in &query.projections {
        match p {
            Projection::AliasStar(a) if query.relation_vars.contains(a) => {
                err.get_or_insert(CiqlError::Semantic(format!(
                    "{a}.* cannot be projected for a Relation variable"
                )));
            }
            Projection::Star if !query.relation_vars.is_empty() => {
                err.get_or_insert(CiqlError::Semantic(
                    "SELECT * cannot be combined with Relation variables".into(),
                ));
            }
            _ => {}
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    if referenced.is_empty() {
        let mut q = query.clone();
        q.relation_vars.clear();
        q.column_vars.clear();
        return Ok(vec![q]);
    }
    let in_from: Vec<&str> = query.tables.iter().map(|t| t.table.as_str()).collect();
    let eligible: Vec<usize> = (0..catalog.tables().len())
        .filter(|&i| !in_from.contains(&catalog.tables()[i].name.as_str()))
        .collect();
    if eligible.is_empty() {
        return Err(CiqlError::EmptyCatalog);
    }

    // per relation variable: (table index, column-variable assignment)
    let mut choices: Vec<Vec<(usize, Vec<String>)>> = Vec::new();
    for rel in &referenced {
        let vars = usage.get(rel).cloned().unwrap_or_default();
        let mut options = Vec::new();
        for &ti in &eligible {
            let t = &catalog.tables()[ti];
            let strings: Vec<String> = t
                .columns
                .iter()
                .filter(|c| c.ty == ColumnType::String)
                .map(|c| c.name.clone())
                .collect();
            let mut combos: Vec<Vec<String>> = vec![Vec::new()];
            for _ in &vars {
                combos = combos
                    .into_iter()
                    .flat_map(|prefix| {
                        strings.iter().map(move |c| {
                            let mut next = prefix.clone();
                            next.push(c.clone());
                            next
                        })
                    })
                    .collect();
            }
            options.extend(combos.into_iter().map(|cols| (ti, cols)));
        }
        choices.push(options);
    }

    let mut out = Vec::new();
    let mut pick = vec![0usize; choices.len()];
    if choices.iter().any(|c| c.is_empty()) {
        return Ok(out);
    }
    loop {
        let mut q = query.clone();
        q.relation_vars.clear();
        q.column_vars.clear();
        let mut columns: BTreeMap<(String, String), String> = BTreeMap::new();
        for (r, rel) in referenced.iter().enumerate() {
            let (ti, cols) = &choices[r][pick[r]];
            q.tables.push(TableRef {
                table: catalog.tables()[*ti].name.clone(),
                alias: rel.to_string(),
            });
            for (var, col) in usage.get(rel).into_iter().flatten().zip(cols) {
                columns.insert((rel.to_string(), var.to_string()), col.clone());
            }
        }
        for e in exprs_mut(&mut q) {
            e.walk_mut(&mut |node| {
                if let Expr::Column {
                    qualifier,
                    column,
                    labeled,
                    ..
                } = node
                {
                    if let Some(c) = columns.get(&(qualifier.clone(), column.clone())) {
                        *column = c.clone();
                        *labeled = true;
                    }
                }
            });
        }
        out.push(q);
        // odometer over the choices
        let mut r = choices.len();
        loop {
            if r == 0 {
                return Ok(out);
            }
            r -= 1;
            pick[r] += 1;
            if pick[r] < choices[r].len() {
                break;
            }
            pick[r] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ciql::parse;
    use crate::textify::{Column, Table};

    fn catalog() -> Database {
        let s = |n: &str| Column::new(n, ColumnType::String);
        Database::new(
            vec![
                Table::new(
                    "A",
                    vec![
                        s("a1"),
                        s("a2"),
                        s("a3"),
                        Column::new("n", ColumnType::Integer),
                    ],
                ),
                Table::new("B", vec![s("b1"), s("b2")]),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn no_relation_variables_is_identity() {
        let q = parse("SELECT * FROM A").unwrap();
        assert_eq!(rewrite_relation_vars(&q, &catalog()).unwrap(), [q]);
    }

    #[test]
    fn one_rewrite_per_string_column() {
        let q =
            parse("SELECT S.X FROM Token e; Relation S; column X WHERE contains(S.X, e)").unwrap();
        let rewrites = rewrite_relation_vars(&q, &catalog()).unwrap();
        assert_eq!(rewrites.len(), 5);
        let labels: Vec<String> = rewrites
            .iter()
            .map(|r| format!("{}:{}", r.tables[0].table, r.where_clause.as_ref().unwrap()))
            .collect();
        assert_eq!(labels[0], "A:contains(S.a1, e)");
        assert_eq!(labels[4], "B:contains(S.b2, e)");
    }

    #[test]
    fn tables_in_from_are_excluded() {
        let q = parse("SELECT S.X FROM A; Relation S; column X").unwrap();
        let rewrites = rewrite_relation_vars(&q, &catalog()).unwrap();
        assert_eq!(rewrites.len(), 2);
        assert!(rewrites.iter().all(|r| r.tables[1].table == "B"));
        let q = parse("SELECT S.X FROM A, B; Relation S; column X").unwrap();
        assert!(matches!(
            rewrite_relation_vars(&q, &catalog()),
            Err(CiqlError::EmptyCatalog)
        ));
    }

    #[test]
    fn star_with_relation_variable_is_rejected() {
        let q = parse("SELECT * FROM Relation S; column X WHERE contains(S.X, 'a')").unwrap();
        assert!(matches!(
            rewrite_relation_vars(&q, &catalog()),
            Err(CiqlError::Semantic(_))
        ));
    }
}
