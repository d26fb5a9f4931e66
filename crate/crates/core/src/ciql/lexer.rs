use super::ast::Pos;
use super::CiqlError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    Comma,
    Semi,
    Dot,
    LParen,
    RParen,
    Star,
    Plus,
    Minus,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Int(i) => format!("number {i}"),
            Tok::Real(x) => format!("number {x}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eof => "end of input".into(),
            other => {
                let s = match other {
                    Tok::Comma => ",",
                    Tok::Semi => ";",
                    Tok::Dot => ".",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::Star => "*",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Slash => "/",
                    Tok::Eq => "=",
                    Tok::Ne => "<>",
                    Tok::Lt => "<",
                    Tok::Le => "<=",
                    Tok::Gt => ">",
                    _ => ">=",
                };
                format!("'{s}'")
            }
        }
    }
}

pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, CiqlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |pos: Pos, message: String| CiqlError::Syntax {
        line: pos.line,
        col: pos.col,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |n: usize, i: &mut usize, line: &mut usize, col: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i, &mut line, &mut col);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i, &mut line, &mut col);
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(1, &mut i, &mut line, &mut col);
            }
            let mut real = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                real = true;
                advance(1, &mut i, &mut line, &mut col);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i, &mut line, &mut col);
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    advance(j - i, &mut i, &mut line, &mut col);
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        advance(1, &mut i, &mut line, &mut col);
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if real {
                Tok::Real(
                    text.parse()
                        .map_err(|_| syntax(pos, format!("bad number {text:?}")))?,
                )
            } else {
                Tok::Int(
                    text.parse()
                        .map_err(|_| syntax(pos, format!("integer {text} out of range")))?,
                )
            };
            out.push((tok, pos));
            continue;
        }
        if c == '\'' || c == '"' {
            advance(1, &mut i, &mut line, &mut col);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(syntax(pos, "unterminated string".into())),
                    Some(&q) if q == c => {
                        if chars.get(i + 1) == Some(&c) {
                            s.push(c);
                            advance(2, &mut i, &mut line, &mut col);
                        } else {
                            advance(1, &mut i, &mut line, &mut col);
                            break;
                        }
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(1, &mut i, &mut line, &mut col);
                    }
                }
            }
            out.push((Tok::Str(s), pos));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, width) = match two.as_str() {
            "<=" => (Tok::Le, 2),
            ">=" => (Tok::Ge, 2),
            "<>" | "!=" => (Tok::Ne, 2),
            _ => match c {
                ',' => (Tok::Comma, 1),
                ';' => (Tok::Semi, 1),
                '.' => (Tok::Dot, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '*' => (Tok::Star, 1),
                '+' => (Tok::Plus, 1),
                '-' => (Tok::Minus, 1),
                '/' => (Tok::Slash, 1),
                '=' => (Tok::Eq, 1),
                '<' => (Tok::Lt, 1),
                '>' => (Tok::Gt, 1),
                other => return Err(syntax(pos, format!("unexpected character {other:?}"))),
            },
        };
        advance(width, &mut i, &mut line, &mut col);
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
