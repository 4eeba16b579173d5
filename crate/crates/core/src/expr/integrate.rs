//! Antiderivatives for the closed class produced by the boundary-term
//! equations: Laurent monomials, powers of logarithms, and `exp`/`sin`/`cos`
//! with arguments linear in the integration variable.

use num_traits::One;

use super::normal::{Atom, Cleared, Mono, Poly, Trig};
use super::{clear_denominators, Expr};
use crate::error::{Error, Result};

/// An antiderivative of `e` with respect to `var`, free of an additive
/// constant in `var`.
pub fn antiderivative(e: &Expr, var: &str) -> Result<Expr> {
    let c = clear_denominators(e)?;
    if c.denominator.keys().any(|f| f.mentions(var)) {
        let laurent = c.denominator.iter().all(|(f, _)| {
            f.terms.len() == 1 && {
                let (m, k) = f.terms.iter().next().unwrap();
                k.is_one() && m.exp.is_zero() && m.trig.is_none() && m.powers.len() == 1
            }
        });
        if !laurent {
            return Err(Error::Unsupported(format!("cannot integrate `{e}` in {var}")));
        }
    }
    let var_atom = Atom::Sym(var.to_string());
    // Negative powers of `var` handled by shifting exponents.
    let shift = c
        .denominator
        .iter()
        .find(|(f, _)| f.terms.keys().next().unwrap().powers.contains_key(&var_atom))
        .map(|(_, k)| *k as i64)
        .unwrap_or(0);
    let mut rest = c.clone();
    rest.denominator.retain(|f, _| !f.mentions(var));
    let other_den = Cleared {
        numerator: Poly::one(),
        denominator: rest.denominator.clone(),
    }
    .to_expr();
    let mut terms = Vec::new();
    for (m, coeff) in &c.numerator.terms {
        let p = m.power_of(var) as i64 - shift;
        let mut base = m.clone();
        base.powers.remove(&var_atom);
        terms.push(Expr::num(coeff.clone()) * term(&base, p, var, e)?);
    }
    Ok(Expr::add_all(terms) * other_den)
}

/// ∫ var^p · base d var, where `base` carries no plain power of `var`.
fn term(base: &Mono, p: i64, var: &str, whole: &Expr) -> Result<Expr> {
    let unsupported = || Error::Unsupported(format!("cannot integrate `{whole}` in {var}"));
    let x = Expr::sym(var);
    let mut constant = base.clone();
    let mut log_power = 0u32;
    let mut log_arg: Option<Atom> = None;
    for (a, k) in &base.powers {
        if !a.to_expr().contains_symbol(var) {
            continue;
        }
        match a {
            Atom::Ln(arg) if *arg == Poly::atom(Atom::Sym(var.to_string())) && log_arg.is_none() => {
                log_power = *k;
                log_arg = Some(a.clone());
            }
            _ => return Err(unsupported()),
        }
    }
    if let Some(a) = &log_arg {
        constant.powers.remove(a);
    }
    let exp_rate = linear_rate(&base.exp, var).ok_or_else(unsupported)?;
    let trig_rate = match &base.trig {
        Some((_, arg)) => linear_rate(arg, var).ok_or_else(unsupported)?,
        None => Expr::zero(),
    };
    let transcendental = !exp_rate.is_zero_literal() || !trig_rate.is_zero_literal();
    let c = constant.to_expr();
    if !transcendental {
        return Ok(c * power_log(p, log_power, &x));
    }
    if log_power > 0 || p < 0 {
        return Err(unsupported());
    }
    // Integrate x^p · exp(a x + ..) · trig(b x + ..) by parts on x^p.
    let mut strip = base.clone();
    strip.trig = None;
    let exp_part = strip.exp.to_expr().exp();
    let mut others = strip.clone();
    others.exp = Poly::zero();
    let others = others.to_expr();
    let (kind, arg) = match &base.trig {
        Some((k, a)) => (Some(*k), a.to_expr()),
        None => (None, Expr::zero()),
    };
    let a = exp_rate.clone();
    let b = trig_rate.clone();
    let denom = &a * &a + &b * &b;
    // ∫ x^p E T = x^p F - p ∫ x^(p-1) F, with F = ∫ E T.
    let mut result = Expr::zero();
    let mut sign = Expr::one();
    let mut falling = Expr::one();
    let mut order = 0i64;
    let (mut u, mut v) = match kind {
        Some(Trig::Sin) => (Expr::one(), Expr::zero()),
        Some(Trig::Cos) => (Expr::zero(), Expr::one()),
        None => (Expr::one(), Expr::zero()),
    };
    while order <= p {
        // F_{k+1} from F_k.
        let (nu, nv) = if kind.is_none() {
            (u.clone() / a.clone(), Expr::zero())
        } else {
            (
                (a.clone() * u.clone() + b.clone() * v.clone()) / denom.clone(),
                (a.clone() * v.clone() - b.clone() * u.clone()) / denom.clone(),
            )
        };
        u = nu;
        v = nv;
        let f = if kind.is_none() {
            exp_part.clone() * u.clone()
        } else {
            exp_part.clone() * (u.clone() * arg.sin() + v.clone() * arg.cos())
        };
        result = result + sign.clone() * falling.clone() * x.powi(p - order) * f;
        falling = falling * Expr::int(p - order);
        sign = -sign;
        order += 1;
    }
    Ok(others * result)
}

fn power_log(p: i64, log_power: u32, x: &Expr) -> Expr {
    // ∫ x^p ln(x)^m dx
    let ln = x.ln();
    if p == -1 {
        return ln.powi(log_power as i64 + 1) / Expr::int(log_power as i64 + 1);
    }
    let q = Expr::int(p + 1);
    if log_power == 0 {
        return x.powi(p + 1) / q;
    }
    let m = log_power as i64;
    x.powi(p + 1) * ln.powi(m) / q.clone() - Expr::int(m) / q * power_log(p, log_power - 1, x)
}

/// Coefficient of `var` in a polynomial that is affine in it.
fn linear_rate(p: &Poly, var: &str) -> Option<Expr> {
    let mut rate = Vec::new();
    for (m, c) in &p.terms {
        if !m.mentions(var) {
            continue;
        }
        let mut rest = m.clone();
        if rest.powers.remove(&Atom::Sym(var.to_string())) != Some(1) || rest.mentions(var) {
            return None;
        }
        rate.push(Expr::num(c.clone()) * rest.to_expr());
    }
    Some(Expr::add_all(rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::expr::{is_zero, parse};

    fn check(src: &str, var: &str) {
        let mut params = std::collections::BTreeMap::new();
        params.insert("w".to_string(), crate::ParamValue::Symbolic);
        let ctx = Context::new(vec!["x", "y"], "t", params).unwrap();
        let e = parse(src, &ctx).unwrap();
        let f = antiderivative(&e, var).unwrap();
        let back = f.diff(var) - e;
        assert!(is_zero(&back, 1e-10).is_zero(), "{src}: got {f}");
    }

    #[test]
    fn differentiates_back() {
        check("x", "x");
        check("3*x^2*y + y", "x");
        check("t^(-2)*x", "t");
        check("1/t", "t");
        check("ln(t)", "t");
        check("t*ln(t)^2", "t");
        check("exp(2*t)", "t");
        check("t^2*exp(-t)", "t");
        check("sin(2*t)*x", "t");
        check("t*cos(t)", "t");
        check("exp(t)*sin(2*t)", "t");
        check("t*exp(3*t)*cos(2*t + 1)", "t");
        check("exp(w*t)*sin(2*t)*x", "t");
        check("ln(x)*x^2", "x");
    }

    #[test]
    fn rejects_outside_the_class() {
        let ctx = Context::simple(&["x"]);
        let e = parse("exp(x^2)", &ctx).unwrap();
        assert!(matches!(antiderivative(&e, "x"), Err(Error::Unsupported(_))));
    }
}
