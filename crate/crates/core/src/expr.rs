//! A small closed-form expression language for scenario coefficients.
//!
//! Grammar: numbers, coordinates, named parameters, `pi`, the binary
//! operators `+ - * /`, integer powers `^`, unary minus, parentheses and the
//! functions `sin`, `cos`, `exp`, `sqrt`. Every expression evaluates on
//! [`Jet`]s, so all derivatives of scenario data are exact.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Jet, Layout};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval_f64(x),
            Expr::Add(a, b) => a.eval_f64(x) + b.eval_f64(x),
            Expr::Sub(a, b) => a.eval_f64(x) - b.eval_f64(x),
            Expr::Mul(a, b) => a.eval_f64(x) * b.eval_f64(x),
            Expr::Div(a, b) => a.eval_f64(x) / b.eval_f64(x),
            Expr::Pow(a, n) => a.eval_f64(x).powi(*n),
            Expr::Call(f, a) => {
                let v = a.eval_f64(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }

    /// Evaluates on seeded coordinate jets (see [`Jet::seed`]).
    pub fn eval_jet(&self, x: &[Jet], layout: &'static Layout) -> Jet {
        match self {
            Expr::Const(c) => Jet::real(layout, *c),
            Expr::Var(i) => x[*i].clone(),
            Expr::Neg(a) => -a.eval_jet(x, layout),
            Expr::Add(a, b) => a.eval_jet(x, layout) + b.eval_jet(x, layout),
            Expr::Sub(a, b) => a.eval_jet(x, layout) - b.eval_jet(x, layout),
            Expr::Mul(a, b) => {
                if a.is_zero() || b.is_zero() {
                    return Jet::zero(layout);
                }
                a.eval_jet(x, layout) * b.eval_jet(x, layout)
            }
            Expr::Div(a, b) => a.eval_jet(x, layout) / b.eval_jet(x, layout),
            Expr::Pow(a, n) => a.eval_jet(x, layout).powi(*n),
            Expr::Call(f, a) => {
                let v = a.eval_jet(x, layout);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }

    fn fold(self) -> Expr {
        use Expr::*;
        match self {
            Neg(a) => match *a {
                Const(c) => Const(-c),
                a => Neg(Box::new(a)),
            },
            Add(a, b) => match (*a, *b) {
                (Const(x), Const(y)) => Const(x + y),
                (Const(z), e) | (e, Const(z)) if z == 0.0 => e,
                (a, b) => Add(Box::new(a), Box::new(b)),
            },
            Sub(a, b) => match (*a, *b) {
                (Const(x), Const(y)) => Const(x - y),
                (e, Const(z)) if z == 0.0 => e,
                (a, b) => Sub(Box::new(a), Box::new(b)),
            },
            Mul(a, b) => match (*a, *b) {
                (Const(x), Const(y)) => Const(x * y),
                (Const(z), _) | (_, Const(z)) if z == 0.0 => Const(0.0),
                (Const(o), e) | (e, Const(o)) if o == 1.0 => e,
                (a, b) => Mul(Box::new(a), Box::new(b)),
            },
            Div(a, b) => match (*a, *b) {
                (Const(x), Const(y)) => Const(x / y),
                (a, b) => Div(Box::new(a), Box::new(b)),
            },
            Pow(a, n) => match *a {
                Const(x) => Const(x.powi(n)),
                a => Pow(Box::new(a), n),
            },
            Call(f, a) => match *a {
                Const(x) => Const(match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                }),
                a => Call(f, Box::new(a)),
            },
            e => e,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{text}' in '{src}'")))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' in '{src}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a [String],
    params: &'a BTreeMap<String, f64>,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} in '{}'", self.src))
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Tok::Op(o)) if o == c => Ok(()),
            _ => Err(self.err(&format!("expected '{c}'"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            }
            .fold();
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            }
            .fold();
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)).fold())
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let neg = matches!(self.peek(), Some(Tok::Op('-')));
            if neg {
                self.pos += 1;
            }
            match self.next() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < 64.0 => {
                    let n = if neg { -(v as i32) } else { v as i32 };
                    Ok(Expr::Pow(Box::new(base), n).fold())
                }
                _ => Err(self.err("exponent must be an integer literal")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::Op('(')) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)).fold());
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                if let Some(v) = self.params.get(&name) {
                    return Ok(Expr::Const(*v));
                }
                if name == "pi" {
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                Err(self.err(&format!("unknown identifier '{name}'")))
            }
            _ => Err(self.err("unexpected end of expression or token")),
        }
    }
}

/// Parses `src` with `vars` naming the coordinates (in chart order) and
/// `params` supplying named constants.
pub fn parse(src: &str, vars: &[String], params: &BTreeMap<String, f64>) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, vars, params, src };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing tokens"));
    }
    Ok(e)
}

/// Parses a coordinate-free constant expression such as `"pi/2"`.
pub fn parse_const(src: &str, params: &BTreeMap<String, f64>) -> Result<f64> {
    let e = parse(src, &[], params)?;
    e.as_const().ok_or_else(|| Error::Parse(format!("'{src}' is not constant")))
}
