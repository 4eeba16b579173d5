//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | base ("^" exponent)?
//! base   := number | ident | "(" expr ")" | func "(" expr ")"
//! exponent := ["-"] integer ["/" integer] | "(" ["-"] integer ["/" integer] ")"
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Expr, Func};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::rational;

pub fn parse(source: &str, ctx: &Context) -> Result<Expr> {
    let mut parser = Parser {
        src: source.as_bytes(),
        pos: 0,
        ctx,
    };
    let e = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a Context,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(self.term()?.neg());
            } else {
                break;
            }
        }
        Ok(Expr::add_all(terms))
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat(b'*') {
                factors.push(self.factor()?);
            } else if self.eat(b'/') {
                factors.push(self.factor()?.recip());
            } else {
                break;
            }
        }
        Ok(Expr::mul_all(factors))
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let exponent = self.exponent()?;
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<BigRational> {
        let parenthesized = self.eat(b'(');
        let negative = self.eat(b'-');
        let p = self.integer()?;
        let q = if parenthesized && self.eat(b'/') { self.integer()? } else { BigInt::from(1) };
        if q == BigInt::from(0) {
            return Err(self.error("zero denominator in exponent"));
        }
        if parenthesized {
            self.expect(b')')?;
        }
        let r = BigRational::new(p, q);
        Ok(if negative { -r } else { r })
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(text.parse().unwrap())
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("expected number, identifier or `(`")),
            None => Err(self.error("unexpected end of input")),
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
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        rational::parse(text).map(Expr::num).ok_or(Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if let Some(func) = Func::from_name(name) {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::apply(func, arg));
        }
        if !self.ctx.resolves(name) {
            return Err(Error::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            });
        }
        Ok(Expr::sym(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    fn ctx() -> Context {
        Context::simple(&["x", "y"])
    }

    #[test]
    fn parses_product_of_function_and_symbol() {
        let e = parse("sin(2*t)*x", &ctx()).unwrap();
        let expected = Expr::mul_all([(Expr::int(2) * Expr::sym("t")).sin(), Expr::sym("x")]);
        assert_eq!(e, expected);
        assert!(matches!(e.node(), Node::Mul(_)));
    }

    #[test]
    fn parses_zero() {
        assert_eq!(parse("0", &ctx()).unwrap(), Expr::zero());
    }

    #[test]
    fn reports_syntax_offset() {
        match parse("x + * y", &ctx()) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_unknown_identifier() {
        match parse("x + z", &ctx()) {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "z");
                assert_eq!(offset, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exponents_and_unary_minus() {
        let c = ctx();
        assert_eq!(parse("x^(-2)", &c).unwrap(), Expr::sym("x").powi(-2));
        assert_eq!(parse("x^-2", &c).unwrap(), Expr::sym("x").powi(-2));
        assert_eq!(parse("-x^2", &c).unwrap(), Expr::sym("x").powi(2).neg());
        assert_eq!(parse("1/2", &c).unwrap(), Expr::frac(1, 2));
        assert_eq!(parse("0.25e1", &c).unwrap(), Expr::frac(5, 2));
        assert_eq!(parse("xdot*ydot", &c).unwrap(), Expr::sym("xdot") * Expr::sym("ydot"));
        assert!(parse("x^y", &c).is_err());
        assert!(parse("sin x", &c).is_err());
        assert!(parse("(x", &c).is_err());
    }
}
