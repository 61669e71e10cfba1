//! A small arithmetic language for user-defined initial data.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | "r" | "pi" | func "(" expr ")" | "(" expr ")" ;
//! func    = "exp" | "sin" | "cos" ;
//! number  = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! `^` binds tighter than unary minus and associates to the right, so
//! `-r^2` is `-(r^2)` and `2^3^2` is `2^9`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Exp,
    Sin,
    Cos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    R,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, r: f64) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::R => r,
            Node::Neg(a) => -a.eval(r),
            Node::Bin(op, a, b) => {
                let (x, y) = (a.eval(r), b.eval(r));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => {
                        if y.fract() == 0.0 && y.abs() <= i32::MAX as f64 {
                            x.powi(y as i32)
                        } else {
                            x.powf(y)
                        }
                    }
                }
            }
            Node::Call(f, a) => {
                let x = a.eval(r);
                match f {
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                }
            }
        }
    }
}

/// A parsed expression in the single variable `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
}

impl Expression {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expression { source: src.to_string(), root })
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.root.eval(r)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl FromStr for Expression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expression::parse(s)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Expression { pos: self.pos, msg: msg.to_string() }
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

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                BinOp::Add
            } else if self.eat(b'-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                BinOp::Mul
            } else if self.eat(b'/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let func = match word {
                    "r" => return Ok(Node::R),
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "exp" => Func::Exp,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    _ => {
                        self.pos = start;
                        return Err(self.error(&format!("unknown identifier '{word}'")));
                    }
                };
                if !self.eat(b'(') {
                    return Err(self.error("expected '(' after function name"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(Node::Call(func, Box::new(arg)))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Node::Num).map_err(|_| {
            self.pos = start;
            self.error("malformed number")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, r: f64) -> f64 {
        Expression::parse(src).unwrap().eval(r)
    }

    #[test]
    fn library_shapes() {
        assert_eq!(ev("4*exp(-r^2)", 0.0), 4.0);
        assert_eq!(ev("10*r^2*exp(-r^2)", 1.0), 10.0 * (-1f64).exp());
        assert_eq!(ev("5*exp(-r^2)*sin(3*r)", 0.5), 5.0 * (-0.25f64).exp() * 1.5f64.sin());
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-r^2", 3.0), -9.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(ev("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(ev("2*-r", 1.5), -3.0);
        assert_eq!(ev("1.5e1 + .5", 0.0), 15.5);
        assert_eq!(ev("cos(pi)", 0.0), -1.0);
    }

    #[test]
    fn errors_carry_position() {
        for bad in ["", "4*", "exp r", "foo(r)", "(r", "r)", "3 $ 4", "sin()"] {
            assert!(Expression::parse(bad).is_err(), "{bad:?} should fail");
        }
        match Expression::parse("r + q") {
            Err(Error::Expression { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
