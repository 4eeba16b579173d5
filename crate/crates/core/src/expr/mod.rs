//! Immutable symbolic expressions.
//!
//! An [`Expr`] is a cheaply clonable handle to a shared tree. The smart
//! constructors perform only local simplification (flattening, constant
//! folding, identity elimination); canonical forms live in [`normal`].

mod diff;
mod eval;
pub mod integrate;
pub mod normal;
mod parse;
mod print;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use eval::{evaluate, CompiledExpr, Point};
pub use normal::{clear_denominators, normalize, Cleared, NormalForm};
pub use parse::parse;
pub use zero::{evaluable, is_zero, is_zero_with, ZeroTest, ZeroTestConfig, DEFAULT_SEED};

use crate::rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            _ => None,
        }
    }
}

/// An undetermined function of `args`, differentiated `derivs` times
/// (sorted multiset of argument names).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnknownFn {
    pub name: String,
    pub args: Arc<[String]>,
    pub derivs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(BigRational),
    Sym(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, BigRational),
    Func(Func, Expr),
    Neg(Expr),
    Unknown(UnknownFn),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn num(r: BigRational) -> Expr {
        Expr::from_node(Node::Num(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(rational::int(n))
    }

    pub fn frac(p: i64, q: i64) -> Expr {
        Expr::num(rational::frac(p, q))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: impl Into<String>) -> Expr {
        Expr::from_node(Node::Sym(name.into()))
    }

    pub fn unknown(name: impl Into<String>, args: &[String]) -> Expr {
        Expr::from_node(Node::Unknown(UnknownFn {
            name: name.into(),
            args: args.to_vec().into(),
            derivs: Vec::new(),
        }))
    }

    pub(crate) fn unknown_fn(u: UnknownFn) -> Expr {
        Expr::from_node(Node::Unknown(u))
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        self.as_num().is_some_and(Zero::is_zero)
    }

    pub fn is_one_literal(&self) -> bool {
        self.as_num().is_some_and(One::is_one)
    }

    pub fn add_all<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut constant = BigRational::zero();
        let mut terms = Vec::new();
        for item in items {
            match item.node() {
                Node::Num(r) => constant += r,
                Node::Add(inner) => {
                    for e in inner {
                        match e.node() {
                            Node::Num(r) => constant += r,
                            _ => terms.push(e.clone()),
                        }
                    }
                }
                _ => terms.push(item),
            }
        }
        if !constant.is_zero() {
            terms.push(Expr::num(constant));
        }
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::from_node(Node::Add(terms)),
        }
    }

    pub fn mul_all<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut constant = BigRational::one();
        let mut factors = Vec::new();
        for item in items {
            match item.node() {
                Node::Num(r) => constant *= r,
                Node::Mul(inner) => {
                    for e in inner {
                        match e.node() {
                            Node::Num(r) => constant *= r,
                            _ => factors.push(e.clone()),
                        }
                    }
                }
                Node::Neg(inner) => {
                    constant = -constant;
                    match inner.node() {
                        Node::Mul(fs) => {
                            for e in fs {
                                match e.node() {
                                    Node::Num(r) => constant *= r,
                                    _ => factors.push(e.clone()),
                                }
                            }
                        }
                        Node::Num(r) => constant *= r,
                        _ => factors.push(inner.clone()),
                    }
                }
                _ => factors.push(item),
            }
        }
        if constant.is_zero() {
            return Expr::zero();
        }
        if factors.is_empty() {
            return Expr::num(constant);
        }
        if factors.len() == 1 && constant == -BigRational::one() {
            return factors.pop().unwrap().neg();
        }
        if !constant.is_one() {
            factors.insert(0, Expr::num(constant));
        }
        if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::from_node(Node::Mul(factors))
        }
    }

    pub fn pow(&self, exponent: BigRational) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return self.clone();
        }
        match self.node() {
            Node::Num(r) if rational::is_integer(&exponent) => {
                if r.is_zero() && exponent.is_negative() {
                    return Expr::from_node(Node::Pow(self.clone(), exponent));
                }
                let k = rational::to_i64(&exponent).unwrap_or(0);
                if k.abs() <= 64 {
                    return Expr::num(rational::pow(r, k));
                }
                Expr::from_node(Node::Pow(self.clone(), exponent))
            }
            Node::Pow(base, inner) if rational::is_integer(&exponent) && rational::is_integer(inner) => {
                base.pow(inner * &exponent)
            }
            _ => Expr::from_node(Node::Pow(self.clone(), exponent)),
        }
    }

    pub fn powi(&self, k: i64) -> Expr {
        self.pow(rational::int(k))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        if let Some(r) = arg.as_num() {
            if r.is_zero() {
                match func {
                    Func::Sin => return Expr::zero(),
                    Func::Cos | Func::Exp => return Expr::one(),
                    Func::Ln => {}
                }
            }
            if r.is_one() && func == Func::Ln {
                return Expr::zero();
            }
        }
        Expr::from_node(Node::Func(func, arg))
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self.clone())
    }

    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::apply(Func::Ln, self.clone())
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Num(r) => Expr::num(-r),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::from_node(Node::Neg(self.clone())),
        }
    }

    /// Free symbols, excluding unknown-function atoms.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Add(items) | Node::Mul(items) => items.iter().for_each(|e| e.collect_symbols(out)),
            Node::Pow(b, _) | Node::Func(_, b) | Node::Neg(b) => b.collect_symbols(out),
            Node::Unknown(u) => {
                out.extend(u.args.iter().cloned());
            }
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Sym(s) => s == name,
            Node::Add(items) | Node::Mul(items) => items.iter().any(|e| e.contains_symbol(name)),
            Node::Pow(b, _) | Node::Func(_, b) | Node::Neg(b) => b.contains_symbol(name),
            Node::Unknown(u) => u.args.iter().any(|a| a == name),
        }
    }

    pub fn contains_unknown(&self) -> bool {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => false,
            Node::Add(items) | Node::Mul(items) => items.iter().any(Expr::contains_unknown),
            Node::Pow(b, _) | Node::Func(_, b) | Node::Neg(b) => b.contains_unknown(),
            Node::Unknown(_) => true,
        }
    }

    /// Simultaneous substitution of symbols.
    pub fn substitute(&self, bindings: &BTreeMap<String, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        self.map_leaves(&|node| match node {
            Node::Sym(s) => bindings.get(s).cloned(),
            _ => None,
        })
    }

    /// Replaces unknown functions by concrete expressions, applying any
    /// pending derivatives to the replacement.
    pub fn substitute_unknowns(&self, bindings: &BTreeMap<String, Expr>) -> Expr {
        self.map_leaves(&|node| match node {
            Node::Unknown(u) => bindings.get(&u.name).map(|e| {
                u.derivs.iter().fold(e.clone(), |acc, v| acc.diff(v))
            }),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &dyn Fn(&Node) -> Option<Expr>) -> Expr {
        if let Some(replacement) = f(self.node()) {
            return replacement;
        }
        match self.node() {
            Node::Num(_) | Node::Sym(_) | Node::Unknown(_) => self.clone(),
            Node::Add(items) => Expr::add_all(items.iter().map(|e| e.map_leaves(f))),
            Node::Mul(items) => Expr::mul_all(items.iter().map(|e| e.map_leaves(f))),
            Node::Pow(b, k) => b.map_leaves(f).pow(k.clone()),
            Node::Func(func, a) => Expr::apply(*func, a.map_leaves(f)),
            Node::Neg(a) => a.map_leaves(f).neg(),
        }
    }

    /// Top-level summands (the expression itself when it is not a sum).
    pub fn summands(&self) -> Vec<Expr> {
        match self.node() {
            Node::Add(items) => items.clone(),
            _ => vec![self.clone()],
        }
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<BigRational> for Expr {
    fn from(r: BigRational) -> Expr {
        Expr::num(r)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $body:expr) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
    };
}

binary_op!(Add, add, |a, b| Expr::add_all([a.clone(), b.clone()]));
binary_op!(Sub, sub, |a, b| Expr::add_all([a.clone(), b.neg()]));
binary_op!(Mul, mul, |a, b| Expr::mul_all([a.clone(), b.clone()]));
binary_op!(Div, div, |a, b| Expr::mul_all([a.clone(), b.recip()]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::add_all(iter)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::mul_all(iter)
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
