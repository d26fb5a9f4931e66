//! Runtime values and the operator semantics shared by both evaluators.

use std::cmp::Ordering;
use std::sync::Arc;

use super::ast::{ArithOp, CmpOp, Func};
use super::CiqlError;
use crate::ciops::{cosine, ClosenessScale, TokenSet};
use crate::textify::{canonical_literal, TokenizationConfig, Value};
use crate::vecstore::VectorStore;

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(Arc<str>),
    Vector(Arc<Vec<f64>>),
}

impl Val {
    pub fn from_cell(v: &Value) -> Val {
        match v {
            Value::Null => Val::Null,
            Value::Bool(b) => Val::Bool(*b),
            Value::Int(i) => Val::Int(*i),
            Value::Real(x) => Val::Real(*x),
            Value::Char(c) => Val::Str(c.to_string().into()),
            Value::Str(s) => Val::Str(s.as_str().into()),
        }
    }

    fn type_name(&self) -> &'static str {
        match self {
            Val::Null => "NULL",
            Val::Bool(_) => "boolean",
            Val::Int(_) => "integer",
            Val::Real(_) => "real",
            Val::Str(_) => "string",
            Val::Vector(_) => "vector",
        }
    }

    fn number(&self) -> Option<f64> {
        match self {
            Val::Int(i) => Some(*i as f64),
            Val::Real(x) => Some(*x),
            _ => None,
        }
    }

    /// Three-valued truth: `None` is unknown. Numbers are true when nonzero.
    pub fn truth(&self) -> Result<Option<bool>, CiqlError> {
        match self {
            Val::Null => Ok(None),
            Val::Bool(b) => Ok(Some(*b)),
            Val::Int(i) => Ok(Some(*i != 0)),
            Val::Real(x) => Ok(Some(*x != 0.0)),
            other => Err(CiqlError::Type(format!(
                "{} used as a condition",
                other.type_name()
            ))),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Val::Null => "NULL".into(),
            Val::Bool(true) => "TRUE".into(),
            Val::Bool(false) => "FALSE".into(),
            Val::Int(i) => i.to_string(),
            Val::Real(x) => render_real(*x),
            Val::Str(s) => s.to_string(),
            Val::Vector(v) => format!(
                "[{}]",
                v.iter()
                    .map(|x| render_real(*x))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        }
    }

    /// Tokens of a scalar used where a token scope is expected.
    pub fn tokens(&self, config: &TokenizationConfig) -> Result<Vec<String>, CiqlError> {
        Ok(match self {
            Val::Null => Vec::new(),
            Val::Bool(b) => vec![if *b { "TRUE" } else { "FALSE" }.to_string()],
            Val::Int(i) => vec![i.to_string()],
            Val::Real(x) => vec![canonical_literal(*x)],
            Val::Str(s) => config.split_text(s),
            Val::Vector(_) => return Err(CiqlError::Type("vector used as a token scope".into())),
        })
    }
}

/// Six significant digits in fixed notation.
pub fn render_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Total order for sorting: NULL, booleans, numbers, strings, vectors.
pub fn sort_cmp(a: &Val, b: &Val) -> Ordering {
    fn rank(v: &Val) -> u8 {
        match v {
            Val::Null => 0,
            Val::Bool(_) => 1,
            Val::Int(_) | Val::Real(_) => 2,
            Val::Str(_) => 3,
            Val::Vector(_) => 4,
        }
    }
    match (a, b) {
        (Val::Bool(x), Val::Bool(y)) => x.cmp(y),
        (Val::Int(x), Val::Int(y)) => x.cmp(y),
        (Val::Str(x), Val::Str(y)) => x.cmp(y),
        (Val::Vector(x), Val::Vector(y)) => x
            .iter()
            .zip(y.iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(x.len().cmp(&y.len())),
        _ => match (a.number(), b.number()) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            _ => rank(a).cmp(&rank(b)),
        },
    }
}

pub fn compare(op: CmpOp, l: &Val, r: &Val) -> Result<Val, CiqlError> {
    let ord = match (l, r) {
        (Val::Null, _) | (_, Val::Null) => return Ok(Val::Null),
        (Val::Int(a), Val::Int(b)) => a.cmp(b),
        (Val::Str(a), Val::Str(b)) => a.cmp(b),
        (Val::Bool(a), Val::Bool(b)) => a.cmp(b),
        _ => match (l.number(), r.number()) {
            (Some(a), Some(b)) => match a.partial_cmp(&b) {
                Some(o) => o,
                None => return Ok(Val::Null),
            },
            _ => {
                return Err(CiqlError::Type(format!(
                    "cannot compare {} with {}",
                    l.type_name(),
                    r.type_name()
                )));
            }
        },
    };
    let holds = match op {
        CmpOp::Eq => ord.is_eq(),
        CmpOp::Ne => ord.is_ne(),
        CmpOp::Lt => ord.is_lt(),
        CmpOp::Le => ord.is_le(),
        CmpOp::Gt => ord.is_gt(),
        CmpOp::Ge => ord.is_ge(),
    };
    Ok(Val::Bool(holds))
}

pub fn arith(op: ArithOp, l: &Val, r: &Val) -> Result<Val, CiqlError> {
    let mismatch = || {
        CiqlError::Type(format!(
            "cannot apply arithmetic to {} and {}",
            l.type_name(),
            r.type_name()
        ))
    };
    match (l, r) {
        (Val::Null, _) | (_, Val::Null) => Ok(Val::Null),
        (Val::Vector(a), Val::Vector(b)) => {
            if a.len() != b.len() {
                return Err(CiqlError::Type(format!(
                    "vector lengths {} and {} differ",
                    a.len(),
                    b.len()
                )));
            }
            let f = match op {
                ArithOp::Add => |x: f64, y: f64| x + y,
                ArithOp::Sub => |x: f64, y: f64| x - y,
                _ => return Err(mismatch()),
            };
            Ok(Val::Vector(Arc::new(
                a.iter().zip(b.iter()).map(|(x, y)| f(*x, *y)).collect(),
            )))
        }
        (Val::Vector(v), s) | (s, Val::Vector(v)) => {
            let k = s.number().ok_or_else(mismatch)?;
            let vector_first = matches!(l, Val::Vector(_));
            let scaled: Vec<f64> = match op {
                ArithOp::Mul => v.iter().map(|x| x * k).collect(),
                ArithOp::Div if vector_first => v.iter().map(|x| x / k).collect(),
                _ => return Err(mismatch()),
            };
            Ok(Val::Vector(Arc::new(scaled)))
        }
        (Val::Int(a), Val::Int(b)) if op != ArithOp::Div => {
            let v = match op {
                ArithOp::Add => a.checked_add(*b),
                ArithOp::Sub => a.checked_sub(*b),
                _ => a.checked_mul(*b),
            };
            v.map(Val::Int)
                .ok_or_else(|| CiqlError::Type("integer overflow".into()))
        }
        _ => {
            let (a, b) = (
                l.number().ok_or_else(mismatch)?,
                r.number().ok_or_else(mismatch)?,
            );
            Ok(match op {
                ArithOp::Add => Val::Real(a + b),
                ArithOp::Sub => Val::Real(a - b),
                ArithOp::Mul => Val::Real(a * b),
                ArithOp::Div if b == 0.0 => Val::Null,
                ArithOp::Div => Val::Real(a / b),
            })
        }
    }
}

pub fn negate(v: &Val) -> Result<Val, CiqlError> {
    match v {
        Val::Null => Ok(Val::Null),
        Val::Int(i) => Ok(Val::Int(-i)),
        Val::Real(x) => Ok(Val::Real(-x)),
        Val::Vector(x) => Ok(Val::Vector(Arc::new(x.iter().map(|a| -a).collect()))),
        other => Err(CiqlError::Type(format!(
            "cannot negate {}",
            other.type_name()
        ))),
    }
}

pub fn cast(func: Func, v: &Val) -> Result<Val, CiqlError> {
    let fail = || CiqlError::Cast {
        value: v.render(),
        target: func.name(),
    };
    let real = match v {
        Val::Null => return Ok(Val::Null),
        Val::Bool(b) => f64::from(u8::from(*b)),
        Val::Int(i) => {
            return Ok(if func == Func::Int {
                Val::Int(*i)
            } else {
                Val::Real(*i as f64)
            });
        }
        Val::Real(x) => *x,
        Val::Str(s) => {
            let s = s.trim();
            if func == Func::Int {
                if let Ok(i) = s.parse::<i64>() {
                    return Ok(Val::Int(i));
                }
            }
            s.parse::<f64>().map_err(|_| fail())?
        }
        Val::Vector(_) => return Err(fail()),
    };
    if func == Func::Int {
        if !real.is_finite() || real.abs() >= 9.2e18 {
            return Err(fail());
        }
        Ok(Val::Int(real.trunc() as i64))
    } else {
        Ok(Val::Real(real))
    }
}

/// Vector of a token scope: a lone token is looked up directly; longer
/// scopes use the mean of their [`TokenSet`]. `None` when nothing resolves.
pub fn scope_vector(tokens: &[String], store: &VectorStore) -> Option<Vec<f64>> {
    match tokens {
        [] => None,
        [t] => store.vector(t),
        many => TokenSet::new(many, store).mean(),
    }
}

pub fn cosine_of(a: Option<&[f64]>, b: Option<&[f64]>) -> Result<Val, CiqlError> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Val::Real(cosine(a, b)?)),
        _ => Ok(Val::Null),
    }
}

pub fn closeness(index: usize, cos: &Val, scale: &ClosenessScale) -> Val {
    let threshold = scale
        .get(ClosenessScale::NAMES[index])
        .expect("known closeness name");
    match cos {
        Val::Real(c) => Val::Bool(*c >= threshold),
        _ => Val::Null,
    }
}

/// Proximity family over two token scopes.
pub fn proximity(
    func: Func,
    size: usize,
    a: &[String],
    b: &[String],
    store: &VectorStore,
) -> Result<Val, CiqlError> {
    let (sa, sb) = (TokenSet::new(a, store), TokenSet::new(b, store));
    let v = match func {
        Func::ProximityMax => sa.proximity_max(&sb)?,
        Func::ProximityAvg => sa.proximity_avg(&sb)?,
        Func::ProximityTop2Avg => sa.proximity_top2_avg(&sb)?,
        Func::SubsetProximityAvg => sa.subset_proximity_avg(&sb, size)?,
        other => unreachable!("{other:?} is not a proximity function"),
    };
    Ok(Val::Real(v))
}

/// Occurrences of the contiguous sequence `needle` in `scope`.
pub fn count_occurrences(scope: &[String], needle: &[String]) -> i64 {
    if needle.is_empty() || needle.len() > scope.len() {
        return 0;
    }
    scope.windows(needle.len()).filter(|w| *w == needle).count() as i64
}

pub fn subset_size(v: &Val) -> Result<usize, CiqlError> {
    match v {
        Val::Int(i) if *i >= 1 => Ok(*i as usize),
        other => Err(CiqlError::Type(format!(
            "subset size must be a positive integer, got {}",
            other.render()
        ))),
    }
}
