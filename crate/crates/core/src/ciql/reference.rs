//! Definitional evaluator: full cross product of rows and token domains,
//! every expression evaluated from scratch.

use std::collections::{BTreeSet, HashMap};

use super::ast::{Expr, Func};
use super::engine::literal;
use super::value::{
    arith, cast, closeness, compare, cosine_of, count_occurrences, negate, proximity, scope_vector,
    subset_size, Val,
};
use super::{render_cell, CiqlError, OutRow, Prepared, Session};
use crate::ciops::cosine;
use crate::textify::Tokenizer;

struct Env<'a> {
    session: Session<'a>,
    tokenizer: Tokenizer<'a>,
    prepared: &'a Prepared,
    rows: HashMap<String, (usize, usize)>,
    toks: HashMap<String, String>,
}

pub(crate) fn collect(prepared: &Prepared, session: Session<'_>) -> Result<Vec<OutRow>, CiqlError> {
    let mut env = Env {
        session,
        tokenizer: Tokenizer::new(session.db, session.config)?,
        prepared,
        rows: HashMap::new(),
        toks: HashMap::new(),
    };
    let sizes: Vec<usize> = prepared
        .slots
        .iter()
        .map(|(_, ti)| session.db.tables()[*ti].rows.len())
        .collect();
    let mut out = Vec::new();
    if sizes.contains(&0) {
        return Ok(out);
    }
    let mut pick = vec![0usize; sizes.len()];
    loop {
        for (i, (alias, ti)) in prepared.slots.iter().enumerate() {
            env.rows.insert(alias.clone(), (*ti, pick[i]));
        }
        env.bindings(&mut out)?;
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < sizes[i] {
                break;
            }
            pick[i] = 0;
        }
    }
}

impl Env<'_> {
    fn bindings(&mut self, out: &mut Vec<OutRow>) -> Result<(), CiqlError> {
        let prepared = self.prepared;
        let mut domains = Vec::new();
        for (_, scope) in &prepared.token_vars {
            let distinct: BTreeSet<String> = self.scope(scope)?.into_iter().collect();
            domains.push(distinct.into_iter().collect::<Vec<_>>());
        }
        let mut qualifying = Vec::new();
        if !domains.iter().any(Vec::is_empty) {
            let mut pick = vec![0usize; domains.len()];
            loop {
                for (j, (v, _)) in prepared.token_vars.iter().enumerate() {
                    self.toks.insert(v.clone(), domains[j][pick[j]].clone());
                }
                let ok = match &prepared.where_clause {
                    None => true,
                    Some(w) => self.eval(w)?.truth()? == Some(true),
                };
                if ok {
                    qualifying.push(pick.clone());
                }
                let mut j = domains.len();
                let done = loop {
                    if j == 0 {
                        break true;
                    }
                    j -= 1;
                    pick[j] += 1;
                    if pick[j] < domains[j].len() {
                        break false;
                    }
                    pick[j] = 0;
                };
                if done {
                    break;
                }
            }
        }
        if !prepared.tokens_projected {
            qualifying.truncate(1);
        }
        for pick in qualifying {
            for (j, (v, _)) in prepared.token_vars.iter().enumerate() {
                self.toks.insert(v.clone(), domains[j][pick[j]].clone());
            }
            let mut cells = Vec::new();
            for e in &prepared.projections {
                let v = self.eval(e)?;
                cells.push(render_cell(e, &v, &prepared.slots, self.session.db));
            }
            let keys = prepared
                .order_by
                .iter()
                .map(|e| self.eval(e))
                .collect::<Result<_, _>>()?;
            out.push(OutRow { cells, keys });
        }
        Ok(())
    }

    fn scope(&self, e: &Expr) -> Result<Vec<String>, CiqlError> {
        let db = self.session.db;
        match e {
            Expr::Column {
                qualifier, column, ..
            } => {
                let (ti, row) = self.rows[qualifier];
                let t = &db.tables()[ti];
                Ok(self
                    .tokenizer
                    .cell(t, row, t.column_index(column).expect("checked column")))
            }
            Expr::Row(alias) => {
                let (ti, row) = self.rows[alias];
                Ok(self
                    .tokenizer
                    .row(&db.tables()[ti].name, row, self.session.config.max_hops)?)
            }
            Expr::Database => Ok(self.tokenizer.database(None)?.tokens().to_vec()),
            Expr::TokenVar(v) => Ok(vec![self.toks[v].clone()]),
            other => self.eval(other)?.tokens(self.session.config),
        }
    }

    fn vector(&self, e: &Expr) -> Result<Option<Vec<f64>>, CiqlError> {
        if e.is_vector_valued() {
            return match self.eval(e)? {
                Val::Vector(v) => Ok(Some(v.to_vec())),
                Val::Null => Ok(None),
                other => Err(CiqlError::Type(format!(
                    "expected a vector, got {}",
                    other.render()
                ))),
            };
        }
        Ok(scope_vector(&self.scope(e)?, self.session.store))
    }

    fn eval(&self, e: &Expr) -> Result<Val, CiqlError> {
        let s = self.session;
        match e {
            Expr::Literal(l) => Ok(literal(l)),
            Expr::Ident { .. } => unreachable!("identifiers are resolved by the parser"),
            Expr::Column {
                qualifier, column, ..
            } => {
                let (ti, row) = self.rows[qualifier];
                let t = &s.db.tables()[ti];
                Ok(Val::from_cell(
                    &t.rows[row][t.column_index(column).expect("checked column")],
                ))
            }
            Expr::Row(_) | Expr::Database => Err(CiqlError::Type(
                "a row or database scope is not a value".into(),
            )),
            Expr::TokenVar(v) => Ok(Val::Str(self.toks[v].as_str().into())),
            Expr::Call { func, args } => match func {
                Func::Contains => Ok(Val::Int(count_occurrences(
                    &self.scope(&args[0])?,
                    &self.scope(&args[1])?,
                ))),
                Func::CosineDistance | Func::Closeness(_) => {
                    let c = cosine_of(
                        self.vector(&args[0])?.as_deref(),
                        self.vector(&args[1])?.as_deref(),
                    )?;
                    Ok(match func {
                        Func::Closeness(i) => closeness(*i, &c, s.scale),
                        _ => c,
                    })
                }
                Func::ProximityMax | Func::ProximityAvg | Func::ProximityTop2Avg => proximity(
                    *func,
                    1,
                    &self.scope(&args[0])?,
                    &self.scope(&args[1])?,
                    s.store,
                ),
                Func::SubsetProximityAvg => {
                    let size = subset_size(&self.eval(&args[0])?)?;
                    proximity(
                        *func,
                        size,
                        &self.scope(&args[1])?,
                        &self.scope(&args[2])?,
                        s.store,
                    )
                }
                Func::Vec => Ok(self
                    .vector(&args[0])?
                    .map_or(Val::Null, |v| Val::Vector(v.into()))),
                Func::Int | Func::Real => cast(*func, &self.eval(&args[0])?),
            },
            Expr::MaxCosine {
                table,
                column,
                target,
            } => {
                let Some(target) = self.vector(target)? else {
                    return Ok(Val::Null);
                };
                let t = s.db.table(table).expect("checked table");
                let col = t.column_index(column).expect("checked column");
                let mut best: Option<f64> = None;
                for row in 0..t.rows.len() {
                    if let Some(v) = scope_vector(&self.tokenizer.cell(t, row, col), s.store) {
                        let c = cosine(&v, &target)?;
                        best = Some(best.map_or(c, |b| b.max(c)));
                    }
                }
                Ok(best.map_or(Val::Null, Val::Real))
            }
            Expr::Neg(x) => negate(&self.eval(x)?),
            Expr::Not(x) => Ok(self.eval(x)?.truth()?.map_or(Val::Null, |t| Val::Bool(!t))),
            Expr::Arith { op, left, right } => arith(*op, &self.eval(left)?, &self.eval(right)?),
            Expr::Compare {
                op, left, right, ..
            } => compare(*op, &self.eval(left)?, &self.eval(right)?),
            Expr::And(l, r) => {
                let a = self.eval(l)?.truth()?;
                if a == Some(false) {
                    return Ok(Val::Bool(false));
                }
                Ok(match (a, self.eval(r)?.truth()?) {
                    (_, Some(false)) => Val::Bool(false),
                    (Some(true), Some(true)) => Val::Bool(true),
                    _ => Val::Null,
                })
            }
            Expr::Or(l, r) => {
                let a = self.eval(l)?.truth()?;
                if a == Some(true) {
                    return Ok(Val::Bool(true));
                }
                Ok(match (a, self.eval(r)?.truth()?) {
                    (_, Some(true)) => Val::Bool(true),
                    (Some(false), Some(false)) => Val::Bool(false),
                    _ => Val::Null,
                })
            }
        }
    }
}
