//! Scalar formulas in one variable `t`.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter than
//! unary minus):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 't' | ('log' | 'exp') '(' expr ')' | '(' expr ')'
//! ```
//!
//! `Display` prints a formula that parses back to an expression with the
//! same evaluation, so formulas double as the serialized form of a function.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Expr {
    Var,
    Const(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Log(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn t() -> Expr {
        Expr::Var
    }

    pub fn c(x: f64) -> Expr {
        Expr::Const(x)
    }

    pub fn add(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }

    pub fn sub(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }

    pub fn mul(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }

    pub fn div(self, o: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(o))
    }

    pub fn pow(self, o: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(o))
    }

    pub fn ln(self) -> Expr {
        Expr::Log(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn recip(self) -> Expr {
        Expr::c(1.0).div(self)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Var => t,
            Expr::Const(c) => *c,
            Expr::Neg(a) => -a.eval(t),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, b) => {
                let base = a.eval(t);
                let k = b.eval(t);
                if k.fract() == 0.0 && k.abs() <= 64.0 {
                    base.powi(k as i32)
                } else if k == 0.5 {
                    base.sqrt()
                } else {
                    base.powf(k)
                }
            }
            Expr::Log(a) => a.eval(t).ln(),
            Expr::Exp(a) => a.eval(t).exp(),
        }
    }

    /// Replaces every occurrence of `t` with `inner`.
    pub fn substitute(&self, inner: &Expr) -> Expr {
        let s = |e: &Expr| Box::new(e.substitute(inner));
        match self {
            Expr::Var => inner.clone(),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Neg(a) => Expr::Neg(s(a)),
            Expr::Add(a, b) => Expr::Add(s(a), s(b)),
            Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
            Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
            Expr::Div(a, b) => Expr::Div(s(a), s(b)),
            Expr::Pow(a, b) => Expr::Pow(s(a), s(b)),
            Expr::Log(a) => Expr::Log(s(a)),
            Expr::Exp(a) => Expr::Exp(s(a)),
        }
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Var => f.write_str("t")?,
            Expr::Const(c) => write!(f, "{c:?}")?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_prec(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.write_prec(f, 1)?;
                f.write_str(" + ")?;
                b.write_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.write_prec(f, 1)?;
                f.write_str(" - ")?;
                b.write_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.write_prec(f, 2)?;
                f.write_str("*")?;
                b.write_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.write_prec(f, 2)?;
                f.write_str("/")?;
                b.write_prec(f, 3)?;
            }
            Expr::Pow(a, b) => {
                a.write_prec(f, 5)?;
                f.write_str("^")?;
                b.write_prec(f, 3)?;
            }
            Expr::Log(a) => {
                f.write_str("log(")?;
                a.write_prec(f, 0)?;
                f.write_str(")")?;
            }
            Expr::Exp(a) => {
                f.write_str("exp(")?;
                a.write_prec(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

impl TryFrom<String> for Expr {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Expr::parse(&s)
    }
}

impl From<Expr> for String {
    fn from(e: Expr) -> String {
        e.to_string()
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs.add(self.term()?);
            } else if self.eat(b'-') {
                lhs = lhs.sub(self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs.mul(self.unary()?);
            } else if self.eat(b'/') {
                lhs = lhs.div(self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(base.pow(self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match word {
                    "t" => Ok(Expr::Var),
                    "log" | "exp" => {
                        if !self.eat(b'(') {
                            return Err(self.err("expected `(` after function name"));
                        }
                        let arg = self.expr()?;
                        if !self.eat(b')') {
                            return Err(self.err("expected `)`"));
                        }
                        Ok(if word == "log" { arg.ln() } else { arg.exp() })
                    }
                    _ => {
                        self.pos = start;
                        Err(self.err(&format!("unknown identifier `{word}`")))
                    }
                }
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Expr::Const).map_err(|_| {
            self.pos = start;
            self.err(&format!("bad number `{text}`"))
        })
    }
}
