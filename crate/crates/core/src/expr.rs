//! Evaluator for exact algebraic values written as strings, e.g. `"(1+sqrt(-3))/2"`.
//!
//! Grammar: integers and decimals, `+ - * /`, `^` with an integer exponent, unary
//! minus, parentheses, `i`, `sqrt(expr)` (principal branch; `sqrt` of a negative
//! real gives `i*sqrt(|x|)`), and named variables supplied by the caller.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn eval(expr: &str) -> Result<Complex64> {
    eval_with(expr, &|_| None)
}

/// Evaluates with identifiers looked up through `vars`.
pub fn eval_with(expr: &str, vars: &dyn Fn(&str) -> Option<Complex64>) -> Result<Complex64> {
    let mut p = Parser {
        src: expr,
        bytes: expr.as_bytes(),
        pos: 0,
        vars,
    };
    let v = p.sum()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    vars: &'a dyn Fn(&str) -> Option<Complex64>,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> Error {
        Error::Expression {
            expr: self.src.to_string(),
            message: format!("{message} at offset {}", self.pos),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<Complex64> {
        let mut acc = self.product()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc += self.product()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc -= self.product()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Complex64> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc *= self.unary()?;
                }
                b'/' => {
                    self.pos += 1;
                    let d = self.unary()?;
                    if d.norm() == 0.0 {
                        return Err(self.err("division by zero"));
                    }
                    acc /= d;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Complex64> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Complex64> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let n: i32 = self.src[start..self.pos]
            .parse()
            .map_err(|_| self.err("expected integer exponent"))?;
        let v = base.powi(n);
        Ok(if negative { v.inv() } else { v })
    }

    fn atom(&mut self) -> Result<Complex64> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                let text = &self.src[start..self.pos];
                text.parse::<f64>()
                    .map(|x| Complex64::new(x, 0.0))
                    .map_err(|_| self.err("bad number"))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                match name {
                    "sqrt" => self.sqrt(),
                    "i" => Ok(Complex64::new(0.0, 1.0)),
                    _ => (self.vars)(name).ok_or_else(|| {
                        self.pos = start;
                        self.err(&format!("unknown identifier {name:?}"))
                    }),
                }
            }
            _ => Err(self.err("unexpected token")),
        }
    }

    fn sqrt(&mut self) -> Result<Complex64> {
        if self.peek() != Some(b'(') {
            return Err(self.err("expected '(' after sqrt"));
        }
        let arg = self.atom()?;
        Ok(if arg.im == 0.0 && arg.re < 0.0 {
            Complex64::new(0.0, (-arg.re).sqrt())
        } else {
            arg.sqrt()
        })
    }
}
