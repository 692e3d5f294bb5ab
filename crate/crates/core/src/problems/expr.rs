use std::fmt;

use crate::error::{Error, ParseErrorKind, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Sqrt,
    Log,
    Abs,
    Conj,
    Re,
    Im,
}

impl Func {
    const ALL: [Func; 12] = [
        Func::Exp,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
        Func::Log,
        Func::Abs,
        Func::Conj,
        Func::Re,
        Func::Im,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, x: C64) -> C64 {
        match self {
            Func::Exp => x.exp(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Sqrt => x.sqrt(),
            Func::Log => x.ln(),
            Func::Abs => C64::from(x.norm()),
            Func::Conj => x.conj(),
            Func::Re => C64::from(x.re),
            Func::Im => C64::from(x.im),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Syntax tree of a scalar expression in the variable `z`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(C64),
    Pi,
    I,
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn pow(base: C64, exp: C64) -> C64 {
    if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= 64.0 {
        return base.powi(exp.re as i32);
    }
    if base == C64::new(0.0, 0.0) && exp.re > 0.0 {
        return base;
    }
    base.powc(exp)
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser { src: text, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(p.error(ParseErrorKind::Syntax, format!("unexpected '{}'", p.peek_char().unwrap())));
        }
        Ok(e)
    }

    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Pi => C64::from(std::f64::consts::PI),
            Expr::I => C64::new(0.0, 1.0),
            Expr::Var => z,
            Expr::Neg(x) => -x.eval(z),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(z), b.eval(z));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Call(f, x) => f.apply(x.eval(z)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.re.is_sign_negative() && v.im == 0.0 => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let paren = self.precedence() < min_prec;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(v) => {
                if v.im == 0.0 {
                    write!(f, "{}", v.re)?;
                } else if v.re == 0.0 {
                    write!(f, "{}i", v.im)?;
                } else {
                    write!(f, "({}+{}i)", v.re, v.im)?;
                }
            }
            Expr::Pi => f.write_str("pi")?,
            Expr::I => f.write_str("i")?,
            Expr::Var => f.write_str("z")?,
            Expr::Neg(x) => {
                f.write_str("-")?;
                x.write(f, 3)?;
            }
            Expr::Bin(op, a, b) => {
                let (sym, left, right) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                a.write(f, left)?;
                f.write_str(sym)?;
                b.write(f, right)?;
            }
            Expr::Call(func, x) => {
                write!(f, "{}(", func.name())?;
                x.write(f, 0)?;
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
        self.write(f, 0)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, kind: ParseErrorKind, message: impl Into<String>) -> Error {
        self.error_at(kind, self.pos, message)
    }

    fn error_at(&self, kind: ParseErrorKind, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            kind,
            offset,
            message: message.into(),
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek_char() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat('^') {
            // right-associative, exponent may carry a sign
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        match self.peek_char() {
            None => Err(self.error(ParseErrorKind::Syntax, "unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(ParseErrorKind::Syntax, "expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.ident();
                match name {
                    "z" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Pi),
                    "i" => Ok(Expr::I),
                    _ => {
                        let func = Func::lookup(name).ok_or_else(|| {
                            self.error_at(ParseErrorKind::UnknownIdentifier, start, format!("unknown identifier '{name}'"))
                        })?;
                        if !self.eat('(') {
                            return Err(self.error(ParseErrorKind::Syntax, format!("expected '(' after '{name}'")));
                        }
                        let mut args = vec![self.expr()?];
                        while self.eat(',') {
                            args.push(self.expr()?);
                        }
                        if !self.eat(')') {
                            return Err(self.error(ParseErrorKind::Syntax, "expected ')'"));
                        }
                        if args.len() != 1 {
                            return Err(self.error_at(
                                ParseErrorKind::Arity,
                                start,
                                format!("'{name}' takes 1 argument, got {}", args.len()),
                            ));
                        }
                        Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
                    }
                }
            }
            Some(c) => Err(self.error(ParseErrorKind::Syntax, format!("unexpected '{c}'"))),
        }
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek_char() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let value: f64 = self.src[start..end]
            .parse()
            .map_err(|_| self.error_at(ParseErrorKind::Syntax, start, format!("malformed number '{}'", &self.src[start..end])))?;
        self.pos = end;
        // imaginary literal such as 2i or 1.5e-3i
        if bytes.get(end) == Some(&b'i') && !bytes.get(end + 1).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') {
            self.pos += 1;
            return Ok(Expr::Num(C64::new(0.0, value)));
        }
        Ok(Expr::Num(C64::from(value)))
    }
}
