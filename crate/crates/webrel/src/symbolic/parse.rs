//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' digits)?
//! base   := digits | name | '(' expr ')' | func '(' expr ')'
//! func   := 'sqrt' | 'ln' | 'atan'
//! ```
//!
//! Rational literals such as `3/4` parse as a division of integer literals
//! and fold to a constant.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::expr::{Expr, Func};
use crate::error::ParseError;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn location(&self, pos: usize) -> (usize, usize) {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
        let col = before.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
        (line, col)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let (line, column) = self.location(pos);
        ParseError {
            line,
            column,
            message: message.into(),
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", c as char)))
        }
    }

    fn unexpected(&mut self, wanted: &str) -> ParseError {
        let pos = self.pos;
        match self.peek() {
            Some(c) => self.error_at(pos, format!("expected {wanted}, found `{}`", c as char)),
            None => self.error_at(pos, format!("expected {wanted}, found end of input")),
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        if start < self.src.len() && (self.src[start].is_ascii_alphabetic() || self.src[start] == b'_') {
            self.pos += 1;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Some(std::str::from_utf8(&self.src[start..self.pos]).unwrap());
        }
        None
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                let pos = self.pos;
                let rhs = self.unary()?;
                if rhs.is_zero() {
                    return Err(self.error_at(pos, "division by the constant 0"));
                }
                acc = acc.div(&rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat(b'^') {
            let pos = self.pos;
            let d = self
                .digits()
                .ok_or_else(|| self.error_at(pos, "expected a non-negative integer exponent"))?;
            let e: u32 = d
                .parse()
                .map_err(|_| self.error_at(pos, "exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        if let Some(d) = self.digits() {
            let v: BigInt = d.parse().unwrap();
            return Ok(Expr::constant(BigRational::from_integer(v)));
        }
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        let pos = self.pos;
        if let Some(name) = self.ident() {
            let func = match name {
                "sqrt" => Some(Func::Sqrt),
                "ln" => Some(Func::Ln),
                "atan" => Some(Func::Atan),
                _ => None,
            };
            if let Some(f) = func {
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(b')')?;
                    return Ok(Expr::func(f, &arg));
                }
                return Err(self.error_at(pos, format!("`{name}` must be applied as {name}(...)")));
            }
            return Ok(Expr::var(name));
        }
        Err(self.unexpected("a number, name or `(`"))
    }
}

/// Parses an expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

/// Parses an expression and checks that it only uses `allowed` names.
pub fn parse_in(src: &str, allowed: &[&str]) -> Result<Expr, ParseError> {
    let e = parse(src)?;
    for v in e.variables() {
        if !allowed.contains(&v.as_str()) {
            let pos = find_name(src, &v).unwrap_or(0);
            let p = Parser {
                src: src.as_bytes(),
                pos,
            };
            return Err(p.error_at(pos, format!("unknown variable `{v}`")));
        }
    }
    Ok(e)
}

fn find_name(src: &str, name: &str) -> Option<usize> {
    let b = src.as_bytes();
    let is_id = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
    let mut from = 0;
    while let Some(off) = src[from..].find(name) {
        let s = from + off;
        let e = s + name.len();
        if (s == 0 || !is_id(b[s - 1])) && (e == b.len() || !is_id(b[e])) {
            return Some(s);
        }
        from = s + 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_literals() {
        let v = ["x", "y"];
        let a = parse("1 + 2*x^2").unwrap().to_ratfunc(&v).unwrap();
        let b = parse("(2*(x*x)) + 1").unwrap().to_ratfunc(&v).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse("3/4").unwrap().as_const().unwrap(), &BigRational::new(3.into(), 4.into()));
        assert_eq!(parse("1/2^3").unwrap().as_const().unwrap(), &BigRational::new(1.into(), 8.into()));
        assert_eq!(parse("-2^2").unwrap().as_const().unwrap(), &BigRational::from_integer((-4).into()));
        assert_eq!(parse("x - y - x").unwrap().to_ratfunc(&v).unwrap(), parse("-y").unwrap().to_ratfunc(&v).unwrap());
        assert!(parse(" atan ( sqrt ( y * t ) ) ").is_ok());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("x +\n  * y").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse("x y").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        let e = parse("(x + 1").unwrap_err();
        assert_eq!((e.line, e.column), (1, 7));
        assert!(parse("x^-1").is_err());
        assert!(parse("sqrt x").is_err());
        assert!(parse("x/0").is_err());
        assert!(parse("").is_err());
        let e = parse_in("x + w", &["x", "y"]).unwrap_err();
        assert_eq!(e.column, 5);
    }
}
