//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `i` is the imaginary unit and `pi` the float constant π. Decimal literals
//! are read as exact rationals. Exponents must be integer constants.

use std::fmt;

use num_traits::ToPrimitive;
use thiserror::Error;

use super::coeff::{parse_decimal, Coeff};
use super::Expr;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    UnknownFunction(String),
    DivisionByZero,
    NonIntegerExponent,
    BadNumber(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected}, found `{found}`")
            }
            ParseErrorKind::UnexpectedEnd { expected } => write!(f, "expected {expected}, found end of input"),
            ParseErrorKind::UnknownFunction(name) => {
                write!(f, "unknown function `{name}` (known: exp, sin, cos)")
            }
            ParseErrorKind::DivisionByZero => f.write_str("division by zero"),
            ParseErrorKind::NonIntegerExponent => f.write_str("exponent must be an integer constant"),
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number `{s}`"),
        }
    }
}

/// A parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(s) | Tok::Ident(s) => s.clone(),
            Tok::Op(c) => c.to_string(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k] as char;
        if c.is_ascii_whitespace() {
            k += 1;
            continue;
        }
        let start = k;
        if c.is_ascii_digit() || c == '.' {
            while k < bytes.len() && ((bytes[k] as char).is_ascii_digit() || bytes[k] == b'.') {
                k += 1;
            }
            if k < bytes.len() && (bytes[k] == b'e' || bytes[k] == b'E') {
                let mut j = k + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    k = j;
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            out.push((Tok::Num(text[start..k].to_string()), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while k < bytes.len() && ((bytes[k] as char).is_ascii_alphanumeric() || bytes[k] == b'_') {
                k += 1;
            }
            out.push((Tok::Ident(text[start..k].to_string()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or(c);
                    return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), position: start });
                }
            };
            out.push((tok, start));
            k += 1;
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &'static str) -> ParseError {
        let kind = match self.peek() {
            Tok::End => ParseErrorKind::UnexpectedEnd { expected },
            t => ParseErrorKind::UnexpectedToken { found: t.describe(), expected },
        };
        ParseError { kind, position: self.offset() }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(negate(self.term()?));
                }
                _ => break,
            }
        }
        Ok(flatten_sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Op('/') => {
                    let (_, at) = self.bump();
                    let rhs = self.unary()?;
                    factors.push(reciprocal(rhs, at)?);
                }
                _ => break,
            }
        }
        // Fold constant factors so `1/2` reads back as a single constant.
        Ok(Expr::product(factors))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Tok::Op('-') = self.peek() {
            self.bump();
            return Ok(negate(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let at = self.offset();
            let exponent = self.unary()?;
            let n = exponent
                .exact_value()
                .and_then(|g| g.as_integer())
                .and_then(|n| n.to_i32())
                .ok_or(ParseError { kind: ParseErrorKind::NonIntegerExponent, position: at })?;
            if n < 0 && base.exact_value().is_some_and(|g| g.is_zero()) {
                return Err(ParseError { kind: ParseErrorKind::DivisionByZero, position: at });
            }
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(s) => {
                let (_, at) = self.bump();
                let value = parse_decimal(&s)
                    .ok_or(ParseError { kind: ParseErrorKind::BadNumber(s), position: at })?;
                Ok(Expr::Const(Coeff::real(value)))
            }
            Tok::Ident(name) => {
                let (_, at) = self.bump();
                if let Tok::LParen = self.peek() {
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_close()?;
                    return match name.as_str() {
                        "exp" => Ok(Expr::exp(arg)),
                        "sin" => Ok(Expr::sin(arg)),
                        "cos" => Ok(Expr::cos(arg)),
                        _ => Err(ParseError { kind: ParseErrorKind::UnknownFunction(name), position: at }),
                    };
                }
                Ok(match name.as_str() {
                    "i" => Expr::Const(Coeff::i()),
                    "pi" => Expr::Const(Coeff::float(std::f64::consts::PI)),
                    _ => Expr::Var(name),
                })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            _ => Err(self.error_here("a number, name or `(`")),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error_here("`)`")),
        }
    }
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(c.neg()),
        Expr::Product(mut fs) => {
            if let Some(Expr::Const(c)) = fs.first() {
                fs[0] = Expr::Const(c.neg());
            } else {
                fs.insert(0, Expr::int(-1));
            }
            Expr::Product(fs)
        }
        e => Expr::Product(vec![Expr::int(-1), e]),
    }
}

fn reciprocal(e: Expr, at: usize) -> Result<Expr, ParseError> {
    if let Some(g) = e.exact_value() {
        return g
            .recip()
            .map(|r| Expr::Const(Coeff::Exact(r)))
            .ok_or(ParseError { kind: ParseErrorKind::DivisionByZero, position: at });
    }
    if let Expr::Const(c) = &e {
        return c
            .recip()
            .map(Expr::Const)
            .ok_or(ParseError { kind: ParseErrorKind::DivisionByZero, position: at });
    }
    Ok(Expr::Pow(Box::new(e), -1))
}

/// Merge same-kind children into one flat node without other rewriting.
fn flatten_sum(items: Vec<Expr>) -> Expr {
    if items.len() == 1 {
        return items.into_iter().next().unwrap();
    }
    let mut out = Vec::new();
    for it in items {
        match it {
            Expr::Sum(xs) => out.extend(xs),
            it => out.push(it),
        }
    }
    Expr::Sum(out)
}

/// Parse an expression string.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.error_here("an operator or end of input")),
    }
}
