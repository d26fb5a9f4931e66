//! Recursive-descent parser followed by a resolution pass that classifies
//! bare identifiers and checks declarations.

use std::collections::HashSet;

use super::ast::{ArithOp, CmpOp, Expr, Func, Literal, OrderKey, Pos, Projection, Query, TableRef};
use super::lexer::{lex, Tok};
use super::CiqlError;

const RESERVED: [&str; 13] = [
    "select", "from", "where", "order", "by", "limit", "and", "or", "not", "as", "asc", "desc",
    "max",
];
const DECLARATIONS: [&str; 4] = ["token", "entity", "relation", "column"];

pub fn parse(text: &str) -> Result<Query, CiqlError> {
    let mut p = Parser {
        toks: lex(text)?,
        i: 0,
    };
    let mut q = p.query()?;
    resolve(&mut q)?;
    Ok(q)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

fn is_reserved(s: &str) -> bool {
    let l = s.to_ascii_lowercase();
    RESERVED.contains(&l.as_str()) || ["true", "false", "null"].contains(&l.as_str())
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, CiqlError> {
        let p = self.pos();
        Err(CiqlError::Syntax {
            line: p.line,
            col: p.col,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, CiqlError> {
        self.error(format!(
            "expected {wanted}, found {}",
            self.peek().describe()
        ))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), CiqlError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.unexpected(&kw.to_ascii_uppercase())
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), CiqlError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    /// A non-reserved identifier.
    fn name(&mut self, what: &str) -> Result<String, CiqlError> {
        match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(what),
        }
    }

    fn query(&mut self) -> Result<Query, CiqlError> {
        self.expect_keyword("select")?;
        let mut projections = vec![self.projection()?];
        while self.eat(&Tok::Comma) {
            projections.push(self.projection()?);
        }
        self.expect_keyword("from")?;
        let mut q = Query {
            projections,
            tables: Vec::new(),
            token_vars: Vec::new(),
            relation_vars: Vec::new(),
            column_vars: Vec::new(),
            where_clause: None,
            order_by: Vec::new(),
            limit: None,
        };
        loop {
            self.source_item(&mut q)?;
            let sep = matches!(self.peek(), Tok::Comma | Tok::Semi);
            if !sep || *self.peek_at(1) == Tok::Eof {
                break;
            }
            self.bump();
        }
        if self.eat_keyword("where") {
            q.where_clause = Some(self.expr()?);
        }
        if self.eat_keyword("order") {
            self.expect_keyword("by")?;
            loop {
                let expr = self.expr()?;
                let descending = if self.eat_keyword("desc") {
                    true
                } else {
                    self.eat_keyword("asc");
                    false
                };
                q.order_by.push(OrderKey { expr, descending });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        if self.eat_keyword("limit") {
            match self.bump() {
                Tok::Int(n) if n >= 0 => q.limit = Some(n as usize),
                _ => {
                    self.i -= 1;
                    return self.unexpected("a non-negative integer");
                }
            }
        }
        self.eat(&Tok::Semi);
        if *self.peek() != Tok::Eof {
            return self.unexpected("end of query");
        }
        Ok(q)
    }

    fn projection(&mut self) -> Result<Projection, CiqlError> {
        if self.eat(&Tok::Star) {
            return Ok(Projection::Star);
        }
        if let (Tok::Ident(a), Tok::Dot, Tok::Star) =
            (self.peek().clone(), self.peek_at(1), self.peek_at(2))
        {
            if !is_reserved(&a) {
                self.i += 3;
                return Ok(Projection::AliasStar(a));
            }
        }
        let expr = self.expr()?;
        let label = if self.eat_keyword("as") {
            Some(self.name("a column label")?)
        } else {
            None
        };
        Ok(Projection::Expr { expr, label })
    }

    fn source_item(&mut self, q: &mut Query) -> Result<(), CiqlError> {
        let Tok::Ident(word) = self.peek().clone() else {
            return self.unexpected("a table or declaration");
        };
        let lower = word.to_ascii_lowercase();
        if DECLARATIONS.contains(&lower.as_str()) {
            self.bump();
            let names = self.name_list()?;
            match lower.as_str() {
                "token" | "entity" => q.token_vars.extend(names),
                "relation" => q.relation_vars.extend(names),
                _ => q.column_vars.extend(names),
            }
            return Ok(());
        }
        let table = self.name("a table name")?;
        let alias =
            if self.eat_keyword("as") || matches!(self.peek(), Tok::Ident(s) if !is_reserved(s)) {
                self.name("an alias")?
            } else {
                table.clone()
            };
        q.tables.push(TableRef { table, alias });
        Ok(())
    }

    /// `a, b, c`: continues across commas while the next item is a bare
    /// identifier that is neither a declaration keyword nor a table with an
    /// alias.
    fn name_list(&mut self) -> Result<Vec<String>, CiqlError> {
        let mut names = vec![self.name("a variable name")?];
        loop {
            let continues = *self.peek() == Tok::Comma
                && matches!(self.peek_at(1), Tok::Ident(s)
                    if !is_reserved(s) && !DECLARATIONS.contains(&s.to_ascii_lowercase().as_str()))
                && !matches!(self.peek_at(2), Tok::Ident(s) if !is_reserved(s))
                && *self.peek_at(2) != Tok::Dot;
            if !continues {
                return Ok(names);
            }
            self.bump();
            names.push(self.name("a variable name")?);
        }
    }

    fn expr(&mut self) -> Result<Expr, CiqlError> {
        let mut left = self.and_expr()?;
        while self.eat_keyword("or") {
            let right = self.and_expr()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, CiqlError> {
        let mut left = self.not_expr()?;
        while self.eat_keyword("and") {
            let right = self.not_expr()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<Expr, CiqlError> {
        if self.eat_keyword("not") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, CiqlError> {
        let left = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Ok(left),
        };
        let pos = self.pos();
        self.bump();
        let right = self.additive()?;
        Ok(Expr::Compare {
            op,
            left: Box::new(left),
            right: Box::new(right),
            pos,
        })
    }

    fn additive(&mut self) -> Result<Expr, CiqlError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.multiplicative()?;
            left = Expr::Arith {
                op,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, CiqlError> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.unary()?;
            left = Expr::Arith {
                op,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, CiqlError> {
        if self.eat(&Tok::Minus) {
            return Ok(match self.unary()? {
                Expr::Literal(Literal::Int(i)) => Expr::Literal(Literal::Int(-i)),
                Expr::Literal(Literal::Real(x)) => Expr::Literal(Literal::Real(-x)),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, CiqlError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Literal(Literal::Int(i)))
            }
            Tok::Real(x) => {
                self.bump();
                Ok(Expr::Literal(Literal::Real(x)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Literal(Literal::Str(s)))
            }
            Tok::LParen => {
                self.bump();
                let e = if self.at_keyword("select") {
                    self.max_subquery()?
                } else {
                    self.expr()?
                };
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(word) => {
                let lower = word.to_ascii_lowercase();
                match lower.as_str() {
                    "true" | "false" => {
                        self.bump();
                        return Ok(Expr::Literal(Literal::Bool(lower == "true")));
                    }
                    "null" => {
                        self.bump();
                        return Ok(Expr::Literal(Literal::Null));
                    }
                    _ if is_reserved(&word) => return self.unexpected("an expression"),
                    _ => {}
                }
                self.bump();
                if *self.peek() == Tok::LParen {
                    return self.call(&word, pos);
                }
                if self.eat(&Tok::Dot) {
                    if self.eat(&Tok::Star) {
                        return Ok(Expr::Ident { name: word, pos });
                    }
                    let column = match self.bump() {
                        Tok::Ident(c) => c,
                        _ => {
                            self.i -= 1;
                            return self.unexpected("a column name");
                        }
                    };
                    return Ok(Expr::Column {
                        qualifier: word,
                        column,
                        labeled: false,
                        pos,
                    });
                }
                Ok(Expr::Ident { name: word, pos })
            }
            _ => self.unexpected("an expression"),
        }
    }

    fn call(&mut self, name: &str, pos: Pos) -> Result<Expr, CiqlError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let arity_error = |n: usize| CiqlError::Syntax {
            line: pos.line,
            col: pos.col,
            message: format!("{name}() takes {n} arguments, got {}", args.len()),
        };
        if name.eq_ignore_ascii_case("argmaxcosine") {
            if args.len() != 3 {
                return Err(arity_error(3));
            }
            let (table, column) = match &args[2] {
                Expr::Column {
                    qualifier, column, ..
                } => (qualifier.clone(), column.clone()),
                _ => {
                    return Err(CiqlError::Syntax {
                        line: pos.line,
                        col: pos.col,
                        message: "argmaxCosine() expects Table.column as its third argument".into(),
                    })
                }
            };
            let mut args = args;
            let target = args.remove(1);
            let x = args.remove(0);
            return Ok(Expr::Compare {
                op: CmpOp::Eq,
                left: Box::new(Expr::Call {
                    func: Func::CosineDistance,
                    args: vec![x, target.clone()],
                }),
                right: Box::new(Expr::MaxCosine {
                    table,
                    column,
                    target: Box::new(target),
                }),
                pos,
            });
        }
        let Some(func) = Func::from_name(name) else {
            return Err(CiqlError::Syntax {
                line: pos.line,
                col: pos.col,
                message: format!("unknown function {name}()"),
            });
        };
        if args.len() != func.arity() {
            return Err(arity_error(func.arity()));
        }
        Ok(Expr::Call { func, args })
    }

    /// `SELECT MAX(cosineDistance(vec(A.c), target)) FROM Table A`, with the
    /// arguments of `cosineDistance` in either order.
    fn max_subquery(&mut self) -> Result<Expr, CiqlError> {
        let pos = self.pos();
        self.expect_keyword("select")?;
        self.expect_keyword("max")?;
        self.expect(Tok::LParen)?;
        let inner = self.expr()?;
        self.expect(Tok::RParen)?;
        self.expect_keyword("from")?;
        let table = self.name("a table name")?;
        let alias =
            if self.eat_keyword("as") || matches!(self.peek(), Tok::Ident(s) if !is_reserved(s)) {
                self.name("an alias")?
            } else {
                table.clone()
            };
        let unsupported = || {
            CiqlError::Syntax {
            line: pos.line,
            col: pos.col,
            message: "only SELECT MAX(cosineDistance(vec(alias.column), expr)) FROM table alias is supported as a subquery"
                .into(),
        }
        };
        let Expr::Call {
            func: Func::CosineDistance,
            mut args,
        } = inner
        else {
            return Err(unsupported());
        };
        let inner_column = |e: &Expr| match e {
            Expr::Call {
                func: Func::Vec,
                args,
            } => match &args[0] {
                Expr::Column {
                    qualifier, column, ..
                } if *qualifier == alias => Some(column.clone()),
                _ => None,
            },
            _ => None,
        };
        let (column, target) = if let Some(c) = inner_column(&args[0]) {
            (c, args.remove(1))
        } else if let Some(c) = inner_column(&args[1]) {
            (c, args.remove(0))
        } else {
            return Err(unsupported());
        };
        let mut leaks = false;
        target.walk(&mut |e| match e {
            Expr::Column { qualifier, .. } if *qualifier == alias => leaks = true,
            Expr::Ident { name, .. } if *name == alias => leaks = true,
            _ => {}
        });
        if leaks {
            return Err(unsupported());
        }
        Ok(Expr::MaxCosine {
            table,
            column,
            target: Box::new(target),
        })
    }
}

/// Classifies bare identifiers, validates qualifiers and the cosine constant
/// range.
fn resolve(q: &mut Query) -> Result<(), CiqlError> {
    let mut seen = HashSet::new();
    let mut dup = |name: &str| {
        if seen.insert(name.to_string()) {
            Ok(())
        } else {
            Err(CiqlError::Semantic(format!(
                "{name} is declared more than once"
            )))
        }
    };
    for t in &q.tables {
        dup(&t.alias)?;
    }
    for v in q
        .token_vars
        .iter()
        .chain(&q.relation_vars)
        .chain(&q.column_vars)
    {
        dup(v)?;
    }
    let aliases: HashSet<String> = q
        .tables
        .iter()
        .map(|t| t.alias.clone())
        .chain(q.relation_vars.iter().cloned())
        .collect();
    let tokens: HashSet<String> = q.token_vars.iter().cloned().collect();
    let columns: HashSet<String> = q.column_vars.iter().cloned().collect();
    let relations: HashSet<String> = q.relation_vars.iter().cloned().collect();

    let fix = |e: &mut Expr| -> Result<(), CiqlError> {
        let mut err = None;
        e.walk_mut(&mut |node| {
            if err.is_some() {
                return;
            }
            match node {
                Expr::Ident { name, pos } => {
                    if tokens.contains(name.as_str()) {
                        *node = Expr::TokenVar(name.clone());
                    } else if aliases.contains(name.as_str()) {
                        *node = Expr::Row(name.clone());
                    } else if name.eq_ignore_ascii_case("database") {
                        *node = Expr::Database;
                    } else {
                        err = Some(CiqlError::Undeclared { name: name.clone(), line: pos.line, col: pos.col });
                    }
                }
                Expr::Column { qualifier, column, pos, .. } => {
                    if !aliases.contains(qualifier.as_str()) {
                        err = Some(CiqlError::Undeclared { name: qualifier.clone(), line: pos.line, col: pos.col });
                    } else if relations.contains(qualifier.as_str()) && !columns.contains(column.as_str()) {
                        err = Some(CiqlError::Semantic(format!(
                            "{qualifier}.{column}: a Relation variable must be qualified by a column variable"
                        )));
                    } else if !relations.contains(qualifier.as_str()) && columns.contains(column.as_str()) {
                        err = Some(CiqlError::Semantic(format!(
                            "{qualifier}.{column}: column variables only qualify Relation variables"
                        )));
                    }
                }
                _ => {}
            }
        });
        err.map_or(Ok(()), Err)
    };

    for p in &mut q.projections {
        match p {
            Projection::AliasStar(a) if !aliases.contains(a.as_str()) => {
                return Err(CiqlError::Undeclared {
                    name: a.clone(),
                    line: 0,
                    col: 0,
                })
            }
            Projection::Expr { expr, .. } => fix(expr)?,
            _ => {}
        }
    }
    if let Some(w) = &mut q.where_clause {
        fix(w)?;
    }
    for key in &mut q.order_by {
        if let Expr::Ident { name, .. } = &key.expr {
            let labeled = q.projections.iter().find_map(|p| match p {
                Projection::Expr {
                    expr,
                    label: Some(l),
                } if l == name => Some(expr.clone()),
                _ => None,
            });
            if let Some(expr) = labeled {
                key.expr = expr;
                continue;
            }
        }
        fix(&mut key.expr)?;
    }

    let mut checks: Vec<&Expr> = Vec::new();
    for p in &q.projections {
        if let Projection::Expr { expr, .. } = p {
            checks.push(expr);
        }
    }
    checks.extend(q.where_clause.iter());
    checks.extend(q.order_by.iter().map(|k| &k.expr));
    for e in checks {
        let mut err = None;
        e.walk(&mut |node| {
            if let Expr::Compare {
                left, right, pos, ..
            } = node
            {
                for (a, b) in [(left, right), (right, left)] {
                    if a.is_cosine_valued() {
                        let c = match **b {
                            Expr::Literal(Literal::Int(i)) => Some(i as f64),
                            Expr::Literal(Literal::Real(x)) => Some(x),
                            _ => None,
                        };
                        if let Some(c) = c.filter(|c| !(-1.0..=1.0).contains(c)) {
                            err.get_or_insert(CiqlError::Range {
                                value: c,
                                line: pos.line,
                                col: pos.col,
                            });
                        }
                    }
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(())
}
