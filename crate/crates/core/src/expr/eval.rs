use std::collections::BTreeMap;

use num_traits::Signed;

use super::{Expr, Func, Node};
use crate::context::PI;
use crate::error::{Error, Result};
use crate::rational;

pub type Point = BTreeMap<String, f64>;

/// Evaluates `e` in double precision with all free symbols bound by `point`.
pub fn evaluate(e: &Expr, point: &Point) -> Result<f64> {
    let v = eval_node(e, point)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("non-finite value {v} from `{e}`")))
    }
}

fn eval_node(e: &Expr, point: &Point) -> Result<f64> {
    Ok(match e.node() {
        Node::Num(r) => rational::to_f64(r),
        Node::Sym(s) => match point.get(s) {
            Some(v) => *v,
            None if s == PI => std::f64::consts::PI,
            None => return Err(Error::Unbound(s.clone())),
        },
        Node::Add(items) => {
            let mut acc = 0.0;
            for item in items {
                acc += eval_node(item, point)?;
            }
            acc
        }
        Node::Mul(items) => {
            let mut acc = 1.0;
            for item in items {
                acc *= eval_node(item, point)?;
            }
            acc
        }
        Node::Pow(base, k) => {
            let b = eval_node(base, point)?;
            if b == 0.0 && k.is_negative() {
                return Err(Error::Domain(format!("division by zero in `{e}`")));
            }
            match rational::to_i64(k) {
                Some(n) if n.abs() <= i32::MAX as i64 => b.powi(n as i32),
                _ => {
                    if b < 0.0 {
                        return Err(Error::Domain(format!("fractional power of negative base in `{e}`")));
                    }
                    b.powf(rational::to_f64(k))
                }
            }
        }
        Node::Func(func, arg) => {
            let a = eval_node(arg, point)?;
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Ln => {
                    if a <= 0.0 {
                        return Err(Error::Domain(format!("ln of non-positive value {a}")));
                    }
                    a.ln()
                }
            }
        }
        Node::Neg(inner) => -eval_node(inner, point)?,
        Node::Unknown(u) => return Err(Error::Unbound(u.name.clone())),
    })
}

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize),
    Mul(usize),
    Powi(i32),
    Powf(f64),
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
}

/// A flattened stack program for repeated evaluation over fixed slots.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    depth: usize,
}

impl CompiledExpr {
    pub fn compile(e: &Expr, slots: &[String]) -> Result<CompiledExpr> {
        let mut ops = Vec::new();
        emit(e, slots, &mut ops)?;
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Add(n) | Op::Mul(n) => depth -= n - 1,
                _ => {}
            }
            max_depth = max_depth.max(depth);
        }
        Ok(CompiledExpr { ops, depth: max_depth })
    }

    /// Evaluates with `values[i]` bound to slot `i`; non-finite results are
    /// domain errors.
    pub fn eval(&self, values: &[f64]) -> Result<f64> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.depth);
        for op in &self.ops {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Var(i) => stack.push(values[i]),
                Op::Add(n) => {
                    let start = stack.len() - n;
                    let s: f64 = stack[start..].iter().sum();
                    stack.truncate(start);
                    stack.push(s);
                }
                Op::Mul(n) => {
                    let start = stack.len() - n;
                    let p: f64 = stack[start..].iter().product();
                    stack.truncate(start);
                    stack.push(p);
                }
                Op::Powi(k) => {
                    let b = stack.pop().unwrap();
                    stack.push(b.powi(k));
                }
                Op::Powf(k) => {
                    let b = stack.pop().unwrap();
                    stack.push(b.powf(k));
                }
                Op::Neg => {
                    let b = stack.pop().unwrap();
                    stack.push(-b);
                }
                Op::Sin => {
                    let b = stack.pop().unwrap();
                    stack.push(b.sin());
                }
                Op::Cos => {
                    let b = stack.pop().unwrap();
                    stack.push(b.cos());
                }
                Op::Exp => {
                    let b = stack.pop().unwrap();
                    stack.push(b.exp());
                }
                Op::Ln => {
                    let b = stack.pop().unwrap();
                    stack.push(b.ln());
                }
            }
        }
        let v = stack.pop().unwrap_or(0.0);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("non-finite value {v}")))
        }
    }
}

fn emit(e: &Expr, slots: &[String], ops: &mut Vec<Op>) -> Result<()> {
    match e.node() {
        Node::Num(r) => ops.push(Op::Const(rational::to_f64(r))),
        Node::Sym(s) => match slots.iter().position(|x| x == s) {
            Some(i) => ops.push(Op::Var(i)),
            None if s == PI => ops.push(Op::Const(std::f64::consts::PI)),
            None => return Err(Error::Unbound(s.clone())),
        },
        Node::Add(items) | Node::Mul(items) => {
            for item in items {
                emit(item, slots, ops)?;
            }
            let n = items.len();
            ops.push(if matches!(e.node(), Node::Add(_)) { Op::Add(n) } else { Op::Mul(n) });
        }
        Node::Pow(base, k) => {
            emit(base, slots, ops)?;
            ops.push(match rational::to_i64(k) {
                Some(n) if n.abs() <= i32::MAX as i64 => Op::Powi(n as i32),
                _ => Op::Powf(rational::to_f64(k)),
            });
        }
        Node::Func(func, arg) => {
            emit(arg, slots, ops)?;
            ops.push(match func {
                Func::Sin => Op::Sin,
                Func::Cos => Op::Cos,
                Func::Exp => Op::Exp,
                Func::Ln => Op::Ln,
            });
        }
        Node::Neg(inner) => {
            emit(inner, slots, ops)?;
            ops.push(Op::Neg);
        }
        Node::Unknown(u) => return Err(Error::Unbound(u.name.clone())),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{Context, ParamValue};
    use crate::expr::parse;

    fn point(pairs: &[(&str, f64)]) -> Point {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn evaluates_examples() {
        let mut p = BTreeMap::new();
        p.insert("w".to_string(), ParamValue::Symbolic);
        let ctx = Context::new(vec!["x"], "t", p).unwrap();
        let e = parse("x^2 + t", &ctx).unwrap();
        assert_eq!(evaluate(&e, &point(&[("x", 2.0), ("t", 1.0)])).unwrap(), 5.0);
        let e = parse("sin(pi/2)", &ctx).unwrap();
        assert!((evaluate(&e, &Point::new()).unwrap() - 1.0).abs() < 1e-15);
        let e = parse("cos(w*t)*cos(x)", &ctx).unwrap();
        let v = evaluate(&e, &point(&[("w", 1.0), ("t", 0.0), ("x", 0.0)])).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn domain_errors() {
        let ctx = Context::simple(&["x"]);
        let e = parse("ln(x)", &ctx).unwrap();
        assert!(matches!(evaluate(&e, &point(&[("x", -1.0)])), Err(Error::Domain(_))));
        let e = parse("x^(-1)", &ctx).unwrap();
        assert!(matches!(evaluate(&e, &point(&[("x", 0.0)])), Err(Error::Domain(_))));
        let e = parse("x + y", &Context::simple(&["x", "y"])).unwrap();
        assert!(matches!(evaluate(&e, &point(&[("x", 0.0)])), Err(Error::Unbound(_))));
    }

    #[test]
    fn compiled_matches_tree_walk() {
        let ctx = Context::simple(&["x", "y"]);
        let e = parse("-x^2*y + y^3/3 + exp(-t)*sin(2*x) - ln(1 + y^2)", &ctx).unwrap();
        let slots = vec!["t".to_string(), "x".to_string(), "y".to_string()];
        let c = CompiledExpr::compile(&e, &slots).unwrap();
        for (t, x, y) in [(0.1, 0.3, -0.7), (1.5, -1.2, 0.4)] {
            let direct = evaluate(&e, &point(&[("t", t), ("x", x), ("y", y)])).unwrap();
            let fast = c.eval(&[t, x, y]).unwrap();
            assert!((direct - fast).abs() < 1e-14);
        }
    }
}
