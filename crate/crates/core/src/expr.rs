//! Arithmetic expressions for warping functions, graphs and volume factors.
//!
//! Grammar (recursive descent, `^` binds tighter than unary minus on its
//! left and is right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: `exp ln log sqrt sin cos sinh cosh tanh abs`. Constants: `pi`, `e`.

use std::fmt;

use thiserror::Error;

use crate::geometry::ScalarField;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at offset {offset}")]
pub struct ExprError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Self::Exp,
            "ln" | "log" => Self::Ln,
            "sqrt" => Self::Sqrt,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "sinh" => Self::Sinh,
            "cosh" => Self::Cosh,
            "tanh" => Self::Tanh,
            "abs" => Self::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Exp => "exp",
            Self::Ln => "ln",
            Self::Sqrt => "sqrt",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Sinh => "sinh",
            Self::Cosh => "cosh",
            Self::Tanh => "tanh",
            Self::Abs => "abs",
        }
    }

    fn apply<S: Real>(self, x: S) -> S {
        match self {
            Self::Exp => x.exp(),
            Self::Ln => x.ln(),
            Self::Sqrt => x.sqrt(),
            Self::Sin => x.sin(),
            Self::Cos => x.cos(),
            Self::Sinh => x.sinh(),
            Self::Cosh => x.cosh(),
            Self::Tanh => x.tanh(),
            Self::Abs => x.abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression over a fixed, ordered list of variable names.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    source: String,
    vars: Vec<String>,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let mut p = Parser { src: source.as_bytes(), pos: 0, vars };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self { source: source.to_string(), vars: vars.iter().map(|s| s.to_string()).collect(), root })
    }

    /// Convenience constructor for expressions in one variable.
    pub fn parse_univariate(source: &str, var: &str) -> Result<Self, ExprError> {
        Self::parse(source, &[var])
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn eval<S: Real>(&self, vars: &[S]) -> S {
        eval(&self.root, vars)
    }

    pub fn eval1<S: Real>(&self, x: S) -> S {
        eval(&self.root, &[x])
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl ScalarField for Expr {
    fn value<S: Real>(&self, p: &[S]) -> S {
        self.eval(p)
    }
}

fn eval<S: Real>(node: &Node, vars: &[S]) -> S {
    match node {
        Node::Num(v) => S::from_f64(*v),
        Node::Var(i) => vars[*i],
        Node::Neg(a) => -eval(a, vars),
        Node::Add(a, b) => eval(a, vars) + eval(b, vars),
        Node::Sub(a, b) => eval(a, vars) - eval(b, vars),
        Node::Mul(a, b) => eval(a, vars) * eval(b, vars),
        Node::Div(a, b) => eval(a, vars) / eval(b, vars),
        Node::Pow(a, b) => {
            let base = eval(a, vars);
            match **b {
                Node::Num(e) if e.fract() == 0.0 && e.abs() < 1024.0 => base.powi(e as i32),
                _ => base.powf(eval(b, vars)),
            }
        }
        Node::Call(f, a) => f.apply(eval(a, vars)),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError { offset: self.pos, message: message.to_string() }
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

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat(b'-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Node::Num).map_err(|_| ExprError {
            offset: start,
            message: format!("invalid number '{text}'"),
        })
    }

    fn identifier(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if self.peek() == Some(b'(') {
            let func = Func::lookup(name)
                .ok_or_else(|| ExprError { offset: start, message: format!("unknown function '{name}'") })?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error(&format!("expected ')' after argument of {}", func.name())));
            }
            return Ok(Node::Call(func, Box::new(arg)));
        }
        if let Some(i) = self.vars.iter().position(|v| *v == name) {
            return Ok(Node::Var(i));
        }
        match name {
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            _ => Err(ExprError { offset: start, message: format!("unknown identifier '{name}'") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::derivative;

    #[test]
    fn precedence_and_associativity() {
        let e = Expr::parse("1 + 2*3 - 4/2", &[]).unwrap();
        assert_eq!(e.eval::<f64>(&[]), 5.0);
        let e = Expr::parse("2^3^2", &[]).unwrap();
        assert_eq!(e.eval::<f64>(&[]), 512.0);
        let e = Expr::parse("-2^2", &[]).unwrap();
        assert_eq!(e.eval::<f64>(&[]), -4.0);
        let e = Expr::parse("1.5e-1 * 2E1", &[]).unwrap();
        assert!((e.eval::<f64>(&[]) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn functions_and_variables() {
        let e = Expr::parse("s + 0.1*sin(s)", &["s"]).unwrap();
        assert!((e.eval1(1.0_f64) - (1.0 + 0.1 * 1f64.sin())).abs() < 1e-15);
        let d = derivative(|s| e.eval1(s), 1.0_f64);
        assert!((d - (1.0 + 0.1 * 1f64.cos())).abs() < 1e-15);
        let e = Expr::parse("exp(x1) * cosh(s) / sqrt(pi)", &["x1", "s"]).unwrap();
        let v: f64 = e.eval(&[0.5, 0.25]);
        assert!((v - 0.5f64.exp() * 0.25f64.cosh() / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn errors_carry_offsets() {
        let err = Expr::parse("s + foo(s)", &["s"]).unwrap_err();
        assert_eq!(err.offset, 4);
        let err = Expr::parse("s + t", &["s"]).unwrap_err();
        assert_eq!(err.offset, 4);
        let err = Expr::parse("(s + 1", &["s"]).unwrap_err();
        assert!(err.message.contains("')'"));
        assert!(Expr::parse("s s", &["s"]).is_err());
        assert!(Expr::parse("", &["s"]).is_err());
    }
}
