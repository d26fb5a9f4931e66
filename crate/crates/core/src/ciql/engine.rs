//! Planned evaluator. WHERE conjuncts are checked as soon as the slots and
//! token variables they mention are bound; UDF calls are memoized per
//! binding of their free variables; cell, row and column-vector
//! tokenizations are computed once per query.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use super::ast::{ArithOp, CmpOp, Expr, Func};
use super::value::{
    arith, cast, closeness, compare, cosine_of, count_occurrences, negate, proximity, scope_vector,
    subset_size, Val,
};
use super::{render_cell, CiqlError, OutRow, Prepared, Session};
use crate::ciops::cosine;
use crate::textify::Tokenizer;

type Tokens = Arc<Vec<String>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Dep {
    Slot(usize),
    Var(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum KeyPart {
    Row(usize),
    Tok(Arc<str>),
}

type MemoKey = (usize, Vec<KeyPart>);

enum B {
    Lit(Val),
    Cell {
        slot: usize,
        col: usize,
    },
    Row(usize),
    Db,
    Tok(usize),
    Call {
        func: Func,
        args: Vec<B>,
        memo: usize,
        deps: Vec<Dep>,
    },
    Neg(Box<B>),
    Not(Box<B>),
    Arith {
        op: ArithOp,
        left: Box<B>,
        right: Box<B>,
    },
    And(Box<B>, Box<B>),
    Or(Box<B>, Box<B>),
    Cmp {
        op: CmpOp,
        left: Box<B>,
        right: Box<B>,
    },
    MaxCos {
        column: usize,
        target: Box<B>,
        memo: usize,
        deps: Vec<Dep>,
    },
}

impl B {
    fn vector_valued(&self) -> bool {
        match self {
            B::Call {
                func: Func::Vec, ..
            } => true,
            B::Neg(e) => e.vector_valued(),
            B::Arith { left, right, .. } => left.vector_valued() || right.vector_valued(),
            _ => false,
        }
    }
}

struct Binder<'p> {
    prepared: &'p Prepared,
    tables: &'p [crate::textify::Table],
    memo_ids: HashMap<String, usize>,
    cells: BTreeSet<(usize, usize)>,
    rows: BTreeSet<usize>,
    database: bool,
    /// `(table, column)` per MaxCos column-vector cache slot.
    columns: Vec<(usize, usize)>,
}

impl Binder<'_> {
    fn slot(&self, alias: &str) -> usize {
        self.prepared
            .slots
            .iter()
            .position(|(a, _)| a == alias)
            .expect("resolved alias")
    }

    fn var(&self, name: &str) -> usize {
        self.prepared
            .token_vars
            .iter()
            .position(|(v, _)| v == name)
            .expect("referenced token variable")
    }

    fn deps(&self, e: &Expr) -> Vec<Dep> {
        let mut d = BTreeSet::new();
        e.walk(&mut |n| match n {
            Expr::Column { qualifier, .. } => {
                d.insert(Dep::Slot(self.slot(qualifier)));
            }
            Expr::Row(alias) => {
                d.insert(Dep::Slot(self.slot(alias)));
            }
            Expr::TokenVar(v) => {
                d.insert(Dep::Var(self.var(v)));
            }
            _ => {}
        });
        d.into_iter().collect()
    }

    fn memo_id(&mut self, e: &Expr) -> usize {
        let next = self.memo_ids.len();
        *self.memo_ids.entry(e.to_string()).or_insert(next)
    }

    fn bind(&mut self, e: &Expr) -> B {
        let boxed = |s: &mut Self, e: &Expr| Box::new(s.bind(e));
        match e {
            Expr::Literal(l) => B::Lit(literal(l)),
            Expr::Ident { .. } => unreachable!("identifiers are resolved by the parser"),
            Expr::Column {
                qualifier, column, ..
            } => {
                let slot = self.slot(qualifier);
                let ti = self.prepared.slots[slot].1;
                let col = self.tables[ti]
                    .column_index(column)
                    .expect("checked column");
                self.cells.insert((ti, col));
                B::Cell { slot, col }
            }
            Expr::Row(alias) => {
                let slot = self.slot(alias);
                self.rows.insert(self.prepared.slots[slot].1);
                B::Row(slot)
            }
            Expr::Database => {
                self.database = true;
                B::Db
            }
            Expr::TokenVar(v) => B::Tok(self.var(v)),
            Expr::Call { func, args } => {
                let args = args.iter().map(|a| self.bind(a)).collect();
                B::Call {
                    func: *func,
                    args,
                    memo: self.memo_id(e),
                    deps: self.deps(e),
                }
            }
            Expr::Neg(x) => B::Neg(boxed(self, x)),
            Expr::Not(x) => B::Not(boxed(self, x)),
            Expr::Arith { op, left, right } => B::Arith {
                op: *op,
                left: boxed(self, left),
                right: boxed(self, right),
            },
            Expr::And(l, r) => B::And(boxed(self, l), boxed(self, r)),
            Expr::Or(l, r) => B::Or(boxed(self, l), boxed(self, r)),
            Expr::Compare {
                op, left, right, ..
            } => B::Cmp {
                op: *op,
                left: boxed(self, left),
                right: boxed(self, right),
            },
            Expr::MaxCosine {
                table,
                column,
                target,
            } => {
                let ti = self
                    .tables
                    .iter()
                    .position(|t| t.name == *table)
                    .expect("checked table");
                let col = self.tables[ti]
                    .column_index(column)
                    .expect("checked column");
                self.cells.insert((ti, col));
                let slot = self
                    .columns
                    .iter()
                    .position(|c| *c == (ti, col))
                    .unwrap_or_else(|| {
                        self.columns.push((ti, col));
                        self.columns.len() - 1
                    });
                B::MaxCos {
                    column: slot,
                    target: boxed(self, target),
                    memo: self.memo_id(e),
                    deps: self.deps(e),
                }
            }
        }
    }
}

pub(crate) fn literal(l: &super::ast::Literal) -> Val {
    use super::ast::Literal;
    match l {
        Literal::Null => Val::Null,
        Literal::Bool(b) => Val::Bool(*b),
        Literal::Int(i) => Val::Int(*i),
        Literal::Real(x) => Val::Real(*x),
        Literal::Str(s) => Val::Str(s.as_str().into()),
    }
}

fn conjuncts(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::And(l, r) => {
            conjuncts(l, out);
            conjuncts(r, out);
        }
        other => out.push(other.clone()),
    }
}

struct Plan<'a> {
    session: Session<'a>,
    prepared: &'a Prepared,
    /// Conjuncts grouped by the number of bound positions they need.
    levels: Vec<Vec<B>>,
    projections: Vec<B>,
    order_by: Vec<B>,
    domains: Vec<B>,
    cells: HashMap<(usize, usize), Vec<Tokens>>,
    rows: HashMap<usize, Vec<Tokens>>,
    database: Option<Tokens>,
    column_vectors: Vec<Vec<Option<Arc<Vec<f64>>>>>,
    shared: RwLock<HashMap<MemoKey, Val>>,
}

struct Env<'p, 'a> {
    plan: &'p Plan<'a>,
    rows: Vec<usize>,
    toks: Vec<Arc<str>>,
    memo: HashMap<MemoKey, Val>,
}

pub(crate) fn collect(prepared: &Prepared, session: Session<'_>) -> Result<Vec<OutRow>, CiqlError> {
    let tables = session.db.tables();
    let mut binder = Binder {
        prepared,
        tables,
        memo_ids: HashMap::new(),
        cells: BTreeSet::new(),
        rows: BTreeSet::new(),
        database: false,
        columns: Vec::new(),
    };
    let nslots = prepared.slots.len();
    let mut levels: Vec<Vec<B>> = (0..=nslots + prepared.token_vars.len())
        .map(|_| Vec::new())
        .collect();
    let mut parts = Vec::new();
    if let Some(w) = &prepared.where_clause {
        conjuncts(w, &mut parts);
    }
    for c in &parts {
        let level = binder
            .deps(c)
            .iter()
            .map(|d| match d {
                Dep::Slot(s) => s + 1,
                Dep::Var(v) => nslots + v + 1,
            })
            .max()
            .unwrap_or(0);
        levels[level].push(binder.bind(c));
    }
    let projections = prepared
        .projections
        .iter()
        .map(|e| binder.bind(e))
        .collect();
    let order_by = prepared.order_by.iter().map(|e| binder.bind(e)).collect();
    let domains = prepared
        .token_vars
        .iter()
        .map(|(_, scope)| binder.bind(scope))
        .collect();

    let tokenizer = Tokenizer::new(session.db, session.config)?;
    let mut cells: HashMap<(usize, usize), Vec<Tokens>> = HashMap::new();
    for &(ti, col) in &binder.cells {
        let t = &tables[ti];
        cells.insert(
            (ti, col),
            (0..t.rows.len())
                .map(|r| Arc::new(tokenizer.cell(t, r, col)))
                .collect(),
        );
    }
    let mut rows = HashMap::new();
    for &ti in &binder.rows {
        let t = &tables[ti];
        let toks = (0..t.rows.len())
            .map(|r| {
                Ok(Arc::new(tokenizer.row(
                    &t.name,
                    r,
                    session.config.max_hops,
                )?))
            })
            .collect::<Result<Vec<_>, CiqlError>>()?;
        rows.insert(ti, toks);
    }
    let database = if binder.database {
        Some(Arc::new(tokenizer.database(None)?.tokens().to_vec()))
    } else {
        None
    };
    let column_vectors = binder
        .columns
        .iter()
        .map(|key| {
            cells[key]
                .iter()
                .map(|toks| scope_vector(toks, session.store).map(Arc::new))
                .collect()
        })
        .collect();

    let plan = Plan {
        session,
        prepared,
        levels,
        projections,
        order_by,
        domains,
        cells,
        rows,
        database,
        column_vectors,
        shared: RwLock::new(HashMap::new()),
    };
    plan.run()
}

impl<'a> Plan<'a> {
    fn env(&self) -> Env<'_, 'a> {
        Env {
            plan: self,
            rows: vec![0; self.prepared.slots.len()],
            toks: vec![Arc::from(""); self.prepared.token_vars.len()],
            memo: HashMap::new(),
        }
    }

    fn slot_len(&self, slot: usize) -> usize {
        self.session.db.tables()[self.prepared.slots[slot].1]
            .rows
            .len()
    }

    fn run(&self) -> Result<Vec<OutRow>, CiqlError> {
        let mut env = self.env();
        if !env.check(0)? {
            return Ok(Vec::new());
        }
        if self.prepared.slots.is_empty() {
            let mut out = Vec::new();
            env.tokens_phase(&mut out)?;
            return Ok(out);
        }
        let parts: Vec<Result<Vec<OutRow>, CiqlError>> = (0..self.slot_len(0))
            .into_par_iter()
            .map(|r0| {
                let mut env = self.env();
                let mut out = Vec::new();
                env.rows[0] = r0;
                if env.check(1)? {
                    env.walk_slots(1, &mut out)?;
                }
                Ok(out)
            })
            .collect();
        let mut out = Vec::new();
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }
}

impl Env<'_, '_> {
    /// All conjuncts of `level` hold.
    fn check(&mut self, level: usize) -> Result<bool, CiqlError> {
        let plan = self.plan;
        for c in &plan.levels[level] {
            if self.eval(c)?.truth()? != Some(true) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn walk_slots(&mut self, depth: usize, out: &mut Vec<OutRow>) -> Result<(), CiqlError> {
        if depth == self.rows.len() {
            return self.tokens_phase(out);
        }
        for r in 0..self.plan.slot_len(depth) {
            self.rows[depth] = r;
            if self.check(depth + 1)? {
                self.walk_slots(depth + 1, out)?;
            }
        }
        Ok(())
    }

    fn tokens_phase(&mut self, out: &mut Vec<OutRow>) -> Result<(), CiqlError> {
        let plan = self.plan;
        let mut domains = Vec::with_capacity(plan.domains.len());
        for d in &plan.domains {
            let distinct: BTreeSet<String> = self.scope(d)?.iter().cloned().collect();
            domains.push(
                distinct
                    .into_iter()
                    .map(|t| Arc::<str>::from(t.as_str()))
                    .collect::<Vec<_>>(),
            );
        }
        self.walk_vars(0, &domains, out)?;
        Ok(())
    }

    /// Returns whether a row was emitted below this point.
    fn walk_vars(
        &mut self,
        j: usize,
        domains: &[Vec<Arc<str>>],
        out: &mut Vec<OutRow>,
    ) -> Result<bool, CiqlError> {
        if j == domains.len() {
            out.push(self.emit()?);
            return Ok(true);
        }
        let nslots = self.rows.len();
        let mut emitted = false;
        for t in &domains[j] {
            self.toks[j] = t.clone();
            if self.check(nslots + j + 1)? && self.walk_vars(j + 1, domains, out)? {
                emitted = true;
                if !self.plan.prepared.tokens_projected {
                    return Ok(true);
                }
            }
        }
        Ok(emitted)
    }

    fn emit(&mut self) -> Result<OutRow, CiqlError> {
        let plan = self.plan;
        let mut cells = Vec::with_capacity(plan.projections.len());
        for (b, e) in plan.projections.iter().zip(&plan.prepared.projections) {
            let v = self.eval(b)?;
            cells.push(render_cell(e, &v, &plan.prepared.slots, plan.session.db));
        }
        let keys = plan
            .order_by
            .iter()
            .map(|b| self.eval(b))
            .collect::<Result<_, _>>()?;
        Ok(OutRow { cells, keys })
    }

    fn key(&self, memo: usize, deps: &[Dep]) -> MemoKey {
        let parts = deps
            .iter()
            .map(|d| match d {
                Dep::Slot(s) => KeyPart::Row(self.rows[*s]),
                Dep::Var(v) => KeyPart::Tok(self.toks[*v].clone()),
            })
            .collect();
        (memo, parts)
    }

    fn scope(&mut self, b: &B) -> Result<Tokens, CiqlError> {
        let plan = self.plan;
        let table = |slot: usize| plan.prepared.slots[slot].1;
        Ok(match b {
            B::Cell { slot, col } => plan.cells[&(table(*slot), *col)][self.rows[*slot]].clone(),
            B::Row(slot) => plan.rows[&table(*slot)][self.rows[*slot]].clone(),
            B::Db => plan.database.clone().expect("database tokens prepared"),
            B::Tok(v) => Arc::new(vec![self.toks[*v].to_string()]),
            other => Arc::new(self.eval(other)?.tokens(plan.session.config)?),
        })
    }

    fn vector(&mut self, b: &B) -> Result<Option<Arc<Vec<f64>>>, CiqlError> {
        if b.vector_valued() {
            return match self.eval(b)? {
                Val::Vector(v) => Ok(Some(v)),
                Val::Null => Ok(None),
                other => Err(CiqlError::Type(format!(
                    "expected a vector, got {}",
                    other.render()
                ))),
            };
        }
        let toks = self.scope(b)?;
        Ok(scope_vector(&toks, self.plan.session.store).map(Arc::new))
    }

    fn eval(&mut self, b: &B) -> Result<Val, CiqlError> {
        let plan = self.plan;
        match b {
            B::Lit(v) => Ok(v.clone()),
            B::Cell { slot, col } => {
                let ti = plan.prepared.slots[*slot].1;
                Ok(Val::from_cell(
                    &plan.session.db.tables()[ti].rows[self.rows[*slot]][*col],
                ))
            }
            B::Row(_) | B::Db => Err(CiqlError::Type(
                "a row or database scope is not a value".into(),
            )),
            B::Tok(v) => Ok(Val::Str(self.toks[*v].clone())),
            B::Call {
                func,
                args,
                memo,
                deps,
            } => {
                let key = self.key(*memo, deps);
                if let Some(v) = self.memo.get(&key) {
                    return Ok(v.clone());
                }
                let v = self.call(*func, args)?;
                self.memo.insert(key, v.clone());
                Ok(v)
            }
            B::MaxCos {
                column,
                target,
                memo,
                deps,
            } => {
                let key = self.key(*memo, deps);
                if let Some(v) = plan.shared.read().expect("memo lock").get(&key) {
                    return Ok(v.clone());
                }
                let v = match self.vector(target)? {
                    None => Val::Null,
                    Some(t) => {
                        let mut best: Option<f64> = None;
                        for v in plan.column_vectors[*column].iter().flatten() {
                            let c = cosine(v, &t)?;
                            best = Some(best.map_or(c, |b| b.max(c)));
                        }
                        best.map_or(Val::Null, Val::Real)
                    }
                };
                plan.shared
                    .write()
                    .expect("memo lock")
                    .insert(key, v.clone());
                Ok(v)
            }
            B::Neg(x) => negate(&self.eval(x)?),
            B::Not(x) => Ok(match self.eval(x)?.truth()? {
                Some(t) => Val::Bool(!t),
                None => Val::Null,
            }),
            B::Arith { op, left, right } => {
                let l = self.eval(left)?;
                arith(*op, &l, &self.eval(right)?)
            }
            B::Cmp { op, left, right } => {
                let l = self.eval(left)?;
                compare(*op, &l, &self.eval(right)?)
            }
            B::And(l, r) => {
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
            B::Or(l, r) => {
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

    fn call(&mut self, func: Func, args: &[B]) -> Result<Val, CiqlError> {
        let session = self.plan.session;
        match func {
            Func::Contains => {
                let scope = self.scope(&args[0])?;
                Ok(Val::Int(count_occurrences(&scope, &self.scope(&args[1])?)))
            }
            Func::CosineDistance | Func::Closeness(_) => {
                let a = self.vector(&args[0])?;
                let b = self.vector(&args[1])?;
                let c = cosine_of(a.as_deref().map(|v| &v[..]), b.as_deref().map(|v| &v[..]))?;
                Ok(match func {
                    Func::Closeness(i) => closeness(i, &c, session.scale),
                    _ => c,
                })
            }
            Func::ProximityMax | Func::ProximityAvg | Func::ProximityTop2Avg => {
                let a = self.scope(&args[0])?;
                proximity(func, 1, &a, &self.scope(&args[1])?, session.store)
            }
            Func::SubsetProximityAvg => {
                let size = subset_size(&self.eval(&args[0])?)?;
                let a = self.scope(&args[1])?;
                proximity(func, size, &a, &self.scope(&args[2])?, session.store)
            }
            Func::Vec => Ok(self.vector(&args[0])?.map_or(Val::Null, Val::Vector)),
            Func::Int | Func::Real => cast(func, &self.eval(&args[0])?),
        }
    }
}
