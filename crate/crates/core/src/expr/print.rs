//! Plain infix printing that the parser reads back.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{Expr, Node};
use crate::rational;

const ADD: u8 = 1;
const MUL: u8 = 2;
const POW: u8 = 3;
const ATOM: u8 = 4;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(_) => ADD,
        Node::Mul(_) | Node::Neg(_) => MUL,
        Node::Num(r) if r.is_negative() || !rational::is_integer(r) => MUL,
        Node::Pow(..) => POW,
        _ => ATOM,
    }
}

fn write_with(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

/// Splits a leading negative sign off a summand for `a - b` printing.
fn negated(e: &Expr) -> Option<Expr> {
    match e.node() {
        Node::Neg(inner) => Some(inner.clone()),
        Node::Num(r) if r.is_negative() => Some(Expr::num(-r)),
        Node::Mul(items) => match items[0].as_num() {
            Some(r) if r.is_negative() => {
                let mut rest = items.clone();
                rest[0] = Expr::num(-r);
                Some(Expr::mul_all(rest))
            }
            _ => None,
        },
        _ => None,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Num(r) => write!(f, "{}", rational::display(r)),
        Node::Sym(s) => write!(f, "{s}"),
        Node::Add(items) => {
            for (i, item) in items.iter().enumerate() {
                match (i, negated(item)) {
                    (0, _) => write_with(f, item, ADD)?,
                    (_, Some(pos)) => {
                        write!(f, " - ")?;
                        write_with(f, &pos, MUL)?;
                    }
                    (_, None) => {
                        write!(f, " + ")?;
                        write_with(f, item, MUL)?;
                    }
                }
            }
            Ok(())
        }
        Node::Mul(items) => {
            let skip = items[0].as_num().is_some_and(|r| *r == -BigRational::one());
            if skip {
                write!(f, "-")?;
            }
            for (i, item) in items.iter().enumerate().skip(usize::from(skip)) {
                if i > usize::from(skip) {
                    write!(f, "*")?;
                }
                let min = if i == usize::from(skip) && !skip && item.as_num().is_some() { MUL } else { POW };
                write_with(f, item, min)?;
            }
            Ok(())
        }
        Node::Pow(base, k) => {
            write_with(f, base, ATOM)?;
            if rational::is_integer(k) && k.is_positive() {
                write!(f, "^{}", rational::display(k))
            } else {
                write!(f, "^({})", rational::display(k))
            }
        }
        Node::Func(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, arg)?;
            write!(f, ")")
        }
        Node::Neg(inner) => {
            write!(f, "-")?;
            write_with(f, inner, POW)
        }
        Node::Unknown(u) => {
            if u.derivs.is_empty() {
                write!(f, "{}", u.name)
            } else {
                write!(f, "D[{}]({})", u.derivs.join(","), u.name)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}
