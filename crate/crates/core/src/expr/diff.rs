use num_traits::One;

use super::{Expr, Func, Node, UnknownFn};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::rational;

impl Expr {
    /// Exact partial derivative with respect to the symbol `v`.
    pub fn diff(&self, v: &str) -> Expr {
        if !self.contains_symbol(v) {
            return Expr::zero();
        }
        match self.node() {
            Node::Num(_) => Expr::zero(),
            Node::Sym(s) => {
                if s == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(items) => Expr::add_all(items.iter().map(|e| e.diff(v))),
            Node::Mul(items) => {
                let mut terms = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    let d = item.diff(v);
                    if d.is_zero_literal() {
                        continue;
                    }
                    let mut factors = items.clone();
                    factors[i] = d;
                    terms.push(Expr::mul_all(factors));
                }
                Expr::add_all(terms)
            }
            Node::Pow(base, k) => {
                let db = base.diff(v);
                if k.is_one() {
                    return db;
                }
                Expr::mul_all([Expr::num(k.clone()), base.pow(k - rational::int(1)), db])
            }
            Node::Func(func, arg) => {
                let da = arg.diff(v);
                let outer = match func {
                    Func::Sin => arg.cos(),
                    Func::Cos => arg.sin().neg(),
                    Func::Exp => self.clone(),
                    Func::Ln => arg.recip(),
                };
                outer * da
            }
            Node::Neg(inner) => inner.diff(v).neg(),
            Node::Unknown(u) => {
                let mut derivs = u.derivs.clone();
                derivs.push(v.to_string());
                derivs.sort();
                Expr::unknown_fn(UnknownFn {
                    name: u.name.clone(),
                    args: u.args.clone(),
                    derivs,
                })
            }
        }
    }

    /// Total time derivative `f_t + f_k xdot^k` of a function of `(t, x)`.
    pub fn total_time_derivative(&self, ctx: &Context) -> Result<Expr> {
        if let Some(v) = ctx.velocities().iter().find(|v| self.contains_symbol(v)) {
            return Err(Error::InvalidInput(format!(
                "total time derivative of an expression containing velocity `{v}`"
            )));
        }
        Ok(self.total_time_derivative_unchecked(ctx))
    }

    /// Total time derivative treating velocities as independent (no second
    /// derivatives generated).
    pub(crate) fn total_time_derivative_unchecked(&self, ctx: &Context) -> Expr {
        let mut terms = vec![self.diff(ctx.time())];
        for (x, v) in ctx.coordinates().iter().zip(ctx.velocities()) {
            terms.push(self.diff(x) * Expr::sym(v.clone()));
        }
        Expr::add_all(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{is_zero, parse, ZeroTest};

    fn ctx() -> Context {
        let mut p = std::collections::BTreeMap::new();
        p.insert("w".into(), crate::context::ParamValue::Symbolic);
        p.insert("V0".into(), crate::context::ParamValue::Symbolic);
        Context::new(vec!["x"], "t", p).unwrap()
    }

    fn same(a: &Expr, b: &Expr) -> bool {
        matches!(is_zero(&(a - b), 1e-12), ZeroTest::Zero)
    }

    #[test]
    fn power_rule() {
        let c = ctx();
        let e = parse("x^2", &c).unwrap();
        assert!(same(&e.diff("x"), &parse("2*x", &c).unwrap()));
        let e = parse("V0*x^(-2)", &c).unwrap();
        assert!(same(&e.diff("x"), &parse("-2*V0*x^(-3)", &c).unwrap()));
    }

    #[test]
    fn chain_rule_in_time() {
        let c = ctx();
        let e = parse("cos(w*t)*cos(x)", &c).unwrap();
        let expected = parse("-w*sin(w*t)*cos(x)", &c).unwrap();
        assert!(same(&e.diff("t"), &expected));
    }

    #[test]
    fn total_derivative_examples() {
        let c = ctx();
        let d = parse("t*x", &c).unwrap().total_time_derivative(&c).unwrap();
        assert!(same(&d, &parse("x + t*xdot", &c).unwrap()));
        let d = parse("7", &c).unwrap().total_time_derivative(&c).unwrap();
        assert!(d.is_zero_literal());
        let d = parse("x^2/2", &c).unwrap().total_time_derivative(&c).unwrap();
        assert!(same(&d, &parse("x*xdot", &c).unwrap()));
        assert!(parse("xdot", &c).unwrap().total_time_derivative(&c).is_err());
    }

    #[test]
    fn unknown_functions_accumulate_derivatives() {
        let c = ctx();
        let f = Expr::unknown("f0", &c.configuration_symbols());
        let d = f.diff("x").diff("t");
        match d.node() {
            Node::Unknown(u) => assert_eq!(u.derivs, vec!["t".to_string(), "x".to_string()]),
            _ => panic!(),
        }
        assert!(f.diff("xdot").is_zero_literal());
    }
}
