//! A small arithmetic language for scalar profiles and map components.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `x` (alias of `x1`) and `x1` .. `x9`. Functions are `abs`,
//! `sqrt`, `log`, `min`, `max`, `sin`, `cos`. `^` is right associative.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sqrt,
    Log,
    Min,
    Max,
    Sin,
    Cos,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "log" => Func::Log,
            "min" => Func::Min,
            "max" => Func::Max,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
            Func::Min => "min",
            Func::Max => "max",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index (`x1` is 0).
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct EvalError(pub String);

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let frac_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if frac_start == i && start + 1 == i {
                    return Err(ParseError { offset: start, message: "malformed number".into() });
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| ParseError { offset: start, message: format!("malformed number '{text}'") })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(ParseError { offset: i, message: format!("unexpected character '{c}'") });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

fn var_index(name: &str) -> Option<usize> {
    if name == "x" {
        return Some(0);
    }
    let rest = name.strip_prefix('x')?;
    if rest.len() == 1 {
        let d = rest.as_bytes()[0];
        if (b'1'..=b'9').contains(&d) {
            return Some((d - b'1') as usize);
        }
    }
    None
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

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), message: message.into() })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.bump();
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Sym(',') {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != f.arity() {
                        return Err(ParseError {
                            offset: at,
                            message: format!("{} takes {} argument(s), got {}", f.name(), f.arity(), args.len()),
                        });
                    }
                    Ok(Expr::Call(f, args))
                } else if let Some(i) = var_index(&name) {
                    self.bump();
                    Ok(Expr::Var(i))
                } else {
                    Err(ParseError { offset: at, message: format!("unknown identifier '{name}'") })
                }
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => self.err("unexpected end of input"),
            Tok::Sym(c) => self.err(format!("unexpected '{c}'")),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    if src.trim().is_empty() {
        return Err(ParseError { offset: 0, message: "empty expression".into() });
    }
    let mut p = Parser { toks: tokenize(src)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

fn finite(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError(format!("{what} is not finite")))
    }
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(i) => vars
                .get(*i)
                .copied()
                .ok_or_else(|| EvalError(format!("unbound variable x{}", i + 1))),
            Expr::Neg(e) => Ok(-e.eval(vars)?),
            Expr::Bin(op, a, b) => {
                let a = a.eval(vars)?;
                let b = b.eval(vars)?;
                match op {
                    BinOp::Add => finite(a + b, "sum"),
                    BinOp::Sub => finite(a - b, "difference"),
                    BinOp::Mul => finite(a * b, "product"),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(EvalError("division by zero".into()))
                        } else {
                            finite(a / b, "quotient")
                        }
                    }
                    BinOp::Pow => finite(a.powf(b), "power"),
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(vars)?;
                match f {
                    Func::Abs => Ok(x.abs()),
                    Func::Sqrt if x < 0.0 => Err(EvalError("sqrt of a negative number".into())),
                    Func::Sqrt => Ok(x.sqrt()),
                    Func::Log if x <= 0.0 => Err(EvalError("log of a non-positive number".into())),
                    Func::Log => Ok(x.ln()),
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Min => Ok(x.min(args[1].eval(vars)?)),
                    Func::Max => Ok(x.max(args[1].eval(vars)?)),
                }
            }
        }
    }

    /// Number of input variables the expression needs (highest index + 1).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) => e.arity(),
            Expr::Bin(_, a, b) => a.arity().max(b.arity()),
            Expr::Call(_, args) => args.iter().map(Expr::arity).max().unwrap_or(0),
        }
    }
}

/// Fully parenthesized; re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(0 - {})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
