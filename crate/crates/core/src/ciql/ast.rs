use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub projections: Vec<Projection>,
    pub tables: Vec<TableRef>,
    pub token_vars: Vec<String>,
    pub relation_vars: Vec<String>,
    pub column_vars: Vec<String>,
    pub where_clause: Option<Expr>,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRef {
    pub table: String,
    pub alias: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    /// `*`: every column of every table in FROM.
    Star,
    /// `alias.*`
    AliasStar(String),
    Expr {
        expr: Expr,
        label: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderKey {
    pub expr: Expr,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Contains,
    CosineDistance,
    ProximityMax,
    ProximityAvg,
    ProximityTop2Avg,
    SubsetProximityAvg,
    Vec,
    Int,
    Real,
    /// Index into [`ClosenessScale::NAMES`](crate::ciops::ClosenessScale::NAMES).
    Closeness(usize),
}

impl Func {
    /// Case-insensitive lookup.
    pub fn from_name(name: &str) -> Option<Self> {
        let lower = name.to_ascii_lowercase();
        let f = match lower.as_str() {
            "contains" => Func::Contains,
            "cosinedistance" => Func::CosineDistance,
            "proximitymax" => Func::ProximityMax,
            "proximityavg" => Func::ProximityAvg,
            "proximitytop2avg" => Func::ProximityTop2Avg,
            "subsetproximityavg" => Func::SubsetProximityAvg,
            "vec" => Func::Vec,
            "int" => Func::Int,
            "real" => Func::Real,
            other => {
                return crate::ciops::ClosenessScale::NAMES
                    .iter()
                    .position(|n| *n == other)
                    .map(Func::Closeness)
            }
        };
        Some(f)
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Contains => "contains",
            Func::CosineDistance => "cosineDistance",
            Func::ProximityMax => "proximityMax",
            Func::ProximityAvg => "proximityAvg",
            Func::ProximityTop2Avg => "proximityTop2Avg",
            Func::SubsetProximityAvg => "subsetProximityAvg",
            Func::Vec => "vec",
            Func::Int => "int",
            Func::Real => "real",
            Func::Closeness(i) => crate::ciops::ClosenessScale::NAMES[i],
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Vec | Func::Int | Func::Real => 1,
            Func::SubsetProximityAvg => 3,
            _ => 2,
        }
    }

    /// Functions whose value is a cosine in `[-1, 1]`.
    pub fn is_cosine_valued(self) -> bool {
        matches!(
            self,
            Func::CosineDistance
                | Func::ProximityMax
                | Func::ProximityAvg
                | Func::ProximityTop2Avg
                | Func::SubsetProximityAvg
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Literal),
    /// Unresolved bare identifier; removed by the parser's resolution pass.
    Ident {
        name: String,
        pos: Pos,
    },
    /// `alias.column`. `labeled` cells render as `Table.Column:value`.
    Column {
        qualifier: String,
        column: String,
        labeled: bool,
        pos: Pos,
    },
    /// A whole row: `alias` or `alias.*`.
    Row(String),
    /// The whole-database scope.
    Database,
    TokenVar(String),
    Call {
        func: Func,
        args: Vec<Expr>,
    },
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Arith {
        op: ArithOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Compare {
        op: CmpOp,
        left: Box<Expr>,
        right: Box<Expr>,
        pos: Pos,
    },
    /// Max over rows of `table` of `cosineDistance(vec(row.column), target)`.
    MaxCosine {
        table: String,
        column: String,
        target: Box<Expr>,
    },
}

impl Expr {
    /// Expressions evaluating to a vector rather than a scalar or token scope.
    pub fn is_vector_valued(&self) -> bool {
        match self {
            Expr::Call {
                func: Func::Vec, ..
            } => true,
            Expr::Neg(e) => e.is_vector_valued(),
            Expr::Arith { left, right, .. } => left.is_vector_valued() || right.is_vector_valued(),
            _ => false,
        }
    }

    pub fn is_cosine_valued(&self) -> bool {
        match self {
            Expr::Call { func, .. } => func.is_cosine_valued(),
            Expr::MaxCosine { .. } => true,
            _ => false,
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            Expr::Neg(e) | Expr::Not(e) => e.walk(f),
            Expr::Arith { left, right, .. } | Expr::Compare { left, right, .. } => {
                left.walk(f);
                right.walk(f);
            }
            Expr::And(l, r) | Expr::Or(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Expr::MaxCosine { target, .. } => target.walk(f),
            _ => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match self {
            Expr::Call { args, .. } => args.iter_mut().for_each(|a| a.walk_mut(f)),
            Expr::Neg(e) | Expr::Not(e) => e.walk_mut(f),
            Expr::Arith { left, right, .. } | Expr::Compare { left, right, .. } => {
                left.walk_mut(f);
                right.walk_mut(f);
            }
            Expr::And(l, r) | Expr::Or(l, r) => {
                l.walk_mut(f);
                r.walk_mut(f);
            }
            Expr::MaxCosine { target, .. } => target.walk_mut(f),
            _ => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(_) => 3,
            Expr::Compare { .. } => 4,
            Expr::Arith {
                op: ArithOp::Add | ArithOp::Sub,
                ..
            } => 5,
            Expr::Arith { .. } => 6,
            Expr::Neg(_) => 7,
            _ => 8,
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Null => f.write_str("NULL"),
            Literal::Bool(true) => f.write_str("TRUE"),
            Literal::Bool(false) => f.write_str("FALSE"),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Real(x) if x.fract() == 0.0 && x.is_finite() => write!(f, "{x:.1}"),
            Literal::Real(x) => write!(f, "{x}"),
            Literal::Str(s) => f.write_str(&quote(s)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Literal(l) => write!(f, "{l}"),
            Expr::Ident { name, .. } => f.write_str(name),
            Expr::Column {
                qualifier, column, ..
            } => write!(f, "{qualifier}.{column}"),
            Expr::Row(alias) => f.write_str(alias),
            Expr::Database => f.write_str("database"),
            Expr::TokenVar(v) => f.write_str(v),
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Neg(e) => {
                f.write_str("-")?;
                child(f, e, 8)
            }
            Expr::Not(e) => {
                f.write_str("NOT ")?;
                child(f, e, 3)
            }
            Expr::Arith { op, left, right } => {
                let (sym, p) = match op {
                    ArithOp::Add => ("+", 5),
                    ArithOp::Sub => ("-", 5),
                    ArithOp::Mul => ("*", 6),
                    ArithOp::Div => ("/", 6),
                };
                child(f, left, p)?;
                write!(f, " {sym} ")?;
                child(f, right, p + 1)
            }
            Expr::And(l, r) => {
                child(f, l, 2)?;
                f.write_str(" AND ")?;
                child(f, r, 3)
            }
            Expr::Or(l, r) => {
                child(f, l, 1)?;
                f.write_str(" OR ")?;
                child(f, r, 2)
            }
            Expr::Compare {
                op, left, right, ..
            } => {
                child(f, left, 5)?;
                write!(f, " {} ", op.symbol())?;
                child(f, right, 5)
            }
            Expr::MaxCosine {
                table,
                column,
                target,
            } => {
                write!(f, "maxCosine({table}.{column}, {target})")
            }
        }
    }
}
