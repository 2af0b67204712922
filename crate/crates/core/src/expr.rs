//! Coefficient expressions of time, e.g. `cos(t)` or `0.5*gamma*sin(sqrt(2)*t)^2`.
//!
//! Grammar (highest binding first):
//!
//! ```text
//! primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! unary   := ('-' | '+') unary | primary
//! power   := unary ('^' power)?          right associative
//! product := power (('*' | '/') power)*
//! expr    := product (('+' | '-') product)*
//! ```
//!
//! Unary minus binds tighter than `^`, so `-2^2` is `4`. Names are `t`, `pi`
//! and any parameters supplied by the caller; functions are `sin`, `cos`,
//! `exp`, `sqrt` and `pow(base, exponent)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Pow,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoeffExpr {
    Num(f64),
    Time,
    Pi,
    /// A named constant, resolved when the expression was parsed.
    Param(String, f64),
    Neg(Box<CoeffExpr>),
    Bin(BinOp, Box<CoeffExpr>, Box<CoeffExpr>),
    Call(Func, Vec<CoeffExpr>),
}

impl CoeffExpr {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoeffExpr::Num(x) => *x,
            CoeffExpr::Time => t,
            CoeffExpr::Pi => std::f64::consts::PI,
            CoeffExpr::Param(_, v) => *v,
            CoeffExpr::Neg(e) => -e.eval(t),
            CoeffExpr::Bin(op, a, b) => {
                let (a, b) = (a.eval(t), b.eval(t));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            CoeffExpr::Call(f, args) => {
                let x = args[0].eval(t);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                    Func::Pow => x.powf(args[1].eval(t)),
                }
            }
        }
    }

    /// True when the expression does not mention `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            CoeffExpr::Time => false,
            CoeffExpr::Num(_) | CoeffExpr::Pi | CoeffExpr::Param(..) => true,
            CoeffExpr::Neg(e) => e.is_constant(),
            CoeffExpr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
            CoeffExpr::Call(_, args) => args.iter().all(|a| a.is_constant()),
        }
    }
}

/// Fully parenthesized output that parses back to the same tree.
impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffExpr::Num(x) if *x < 0.0 => write!(f, "(-{:?})", -x),
            CoeffExpr::Num(x) => write!(f, "{x:?}"),
            CoeffExpr::Time => f.write_str("t"),
            CoeffExpr::Pi => f.write_str("pi"),
            CoeffExpr::Param(name, _) => f.write_str(name),
            CoeffExpr::Neg(e) => write!(f, "(-{e})"),
            CoeffExpr::Bin(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            CoeffExpr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses an expression that may only use `t` and `pi`.
pub fn parse_expr(text: &str) -> Result<CoeffExpr> {
    parse_expr_with(text, &BTreeMap::new())
}

/// Parses an expression with additional named constants.
pub fn parse_expr_with(text: &str, params: &BTreeMap<String, f64>) -> Result<CoeffExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        params,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
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

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<CoeffExpr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = CoeffExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<CoeffExpr> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.power()?;
            lhs = CoeffExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn power(&mut self) -> Result<CoeffExpr> {
        let base = self.unary()?;
        if self.eat(b'^') {
            let exp = self.power()?;
            return Ok(CoeffExpr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<CoeffExpr> {
        if self.eat(b'-') {
            return Ok(CoeffExpr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<CoeffExpr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => self.number(),
            Some(ch) if ch.is_ascii_alphabetic() || ch == b'_' => self.name(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<CoeffExpr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.error("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(CoeffExpr::Num).map_err(|_| Error::Parse {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })
    }

    fn name(&mut self) -> Result<CoeffExpr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if self.peek() == Some(b'(') {
            let func = Func::from_name(name).ok_or_else(|| Error::Name {
                pos: start,
                name: name.to_string(),
            })?;
            let open = self.pos;
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            if !self.eat(b')') {
                return Err(self.error("expected `)` or `,`"));
            }
            if args.len() != func.arity() {
                return Err(Error::Parse {
                    pos: open,
                    msg: format!(
                        "`{}` takes {} argument(s), got {}",
                        func.name(),
                        func.arity(),
                        args.len()
                    ),
                });
            }
            return Ok(CoeffExpr::Call(func, args));
        }
        match name {
            "t" => Ok(CoeffExpr::Time),
            "pi" => Ok(CoeffExpr::Pi),
            _ => match self.params.get(name) {
                Some(v) => Ok(CoeffExpr::Param(name.to_string(), *v)),
                None => Err(Error::Name {
                    pos: start,
                    name: name.to_string(),
                }),
            },
        }
    }
}
