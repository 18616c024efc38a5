//! Recursive-descent parser for noncommutative expressions.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor+ ['/' number]
//! factor := atom ['^' int] ("'")*
//! atom   := number ['i'] | 'i' | 'x' int | '(' expr ')' | func '(' expr ')'
//! func   := 'inv' | 'exp' | 'log' | 're'
//! ```
//!
//! Juxtaposition is multiplication. A term whose leading factor is a scalar
//! constant becomes `ScalarMul`; parenthesized variable-free expressions are
//! folded to a single constant, so `(1+2i)` is a complex literal.

use num_complex::Complex64;

use super::ast::Expr;
use crate::error::{Error, Result};
use crate::linalg::{ONE, ZERO};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Slash,
    Caret,
    Quote,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'/' => out.push((start, Tok::Slash)),
            b'^' => out.push((start, Tok::Caret)),
            b'\'' => out.push((start, Tok::Quote)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number `{text}`") })?;
                let imaginary = i < bytes.len()
                    && bytes[i] == b'i'
                    && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_');
                if imaginary {
                    i += 1;
                    out.push((start, Tok::Imag(value)));
                } else {
                    out.push((start, Tok::Num(value)));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let c = src[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax { pos: start, msg: format!("unexpected character `{c}`") });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = if self.peek() == Some(&Tok::Minus) {
            self.bump();
            negate(self.term()?)
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = lhs.add(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = lhs.sub(self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_) | Tok::Imag(_) | Tok::Ident(_) | Tok::LParen))
    }

    fn term(&mut self) -> Result<Expr> {
        if !self.starts_factor() {
            return self.err("expected a term");
        }
        let mut factors = Vec::new();
        while self.starts_factor() {
            factors.push(self.factor()?);
        }
        let mut t = build_term(factors);
        while self.peek() == Some(&Tok::Slash) {
            self.bump();
            let at = self.offset();
            let d = match self.bump() {
                Some(Tok::Num(x)) => Complex64::new(x, 0.0),
                Some(Tok::Imag(x)) => Complex64::new(0.0, x),
                _ => return Err(Error::Syntax { pos: at, msg: "expected a number after `/`".into() }),
            };
            if d == ZERO {
                return Err(Error::Syntax { pos: at, msg: "division by zero".into() });
            }
            t = scale(t, ONE / d);
        }
        Ok(t)
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let at = self.offset();
            match self.bump() {
                Some(Tok::Num(x)) if x.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&x) => {
                    base = match base {
                        Expr::Const(c) => Expr::Const(c.powu(x as u32)),
                        b => b.pow(x as u32),
                    };
                }
                _ => return Err(Error::Syntax { pos: at, msg: "exponent must be a nonnegative integer".into() }),
            }
        }
        while self.peek() == Some(&Tok::Quote) {
            self.bump();
            base = match base {
                Expr::Const(c) => Expr::Const(c.conj()),
                b => b.adjoint(),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Num(x)) => Ok(Expr::Const(Complex64::new(x, 0.0))),
            Some(Tok::Imag(x)) => Ok(Expr::Const(Complex64::new(0.0, x))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(match e.const_value() {
                    Some(c) => Expr::Const(c),
                    None => e,
                })
            }
            Some(Tok::Ident(name)) => {
                if name == "i" {
                    return Ok(Expr::Const(Complex64::new(0.0, 1.0)));
                }
                if let Some(idx) = name.strip_prefix('x') {
                    if let Ok(n) = idx.parse::<usize>() {
                        if n >= 1 && idx.bytes().all(|b| b.is_ascii_digit()) {
                            return Ok(Expr::Var(n - 1));
                        }
                    }
                    if !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(Error::Syntax { pos: at, msg: "variables are numbered from x1".into() });
                    }
                }
                let wrap: fn(Expr) -> Expr = match name.as_str() {
                    "inv" => Expr::inv,
                    "exp" => Expr::exp,
                    "log" => Expr::log,
                    "re" => Expr::re,
                    _ => return Err(Error::UnknownIdentifier { pos: at, name }),
                };
                self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(wrap(arg))
            }
            Some(_) => Err(Error::Syntax { pos: at, msg: "expected an operand".into() }),
            None => Err(Error::Syntax { pos: at, msg: "unexpected end of input".into() }),
        }
    }
}

fn scale(e: Expr, c: Complex64) -> Expr {
    match e {
        Expr::Const(z) => Expr::Const(c * z),
        Expr::ScalarMul(z, inner) => Expr::ScalarMul(c * z, inner),
        e => e.scale(c),
    }
}

fn negate(e: Expr) -> Expr {
    scale(e, -ONE)
}

fn build_term(mut factors: Vec<Expr>) -> Expr {
    if factors.iter().all(|f| matches!(f, Expr::Const(_))) {
        let prod = factors.iter().fold(ONE, |acc, f| match f {
            Expr::Const(c) => acc * c,
            _ => unreachable!(),
        });
        return Expr::Const(prod);
    }
    if let Expr::Const(c) = factors[0] {
        let rest = build_term(factors.split_off(1));
        return Expr::ScalarMul(c, Box::new(rest));
    }
    let mut it = factors.into_iter();
    let first = it.next().expect("nonempty term");
    it.fold(first, Expr::mul)
}

/// Parses expression text.
pub fn parse(src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len() };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}
