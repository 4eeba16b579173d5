//! Zero testing: exact on normal forms, numeric probing otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{clear_denominators, evaluate, Expr, Point};
use crate::context::PI;

pub const DEFAULT_SEED: u64 = 0x006e_6f65_7468_6572;

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroTest {
    Zero,
    NonZero { witness: Point, value: f64 },
    Undecided,
}

impl ZeroTest {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroTest::Zero)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroTestConfig {
    pub seed: u64,
    pub samples: usize,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            seed: DEFAULT_SEED,
            samples: 64,
        }
    }
}

pub fn is_zero(e: &Expr, tol: f64) -> ZeroTest {
    is_zero_with(e, tol, &ZeroTestConfig::default())
}

/// Decides whether `e` vanishes identically. A normalizable expression is
/// zero iff its cleared numerator is; a nonzero numerator is confirmed at a
/// probe point. Anything else is probed with a relative tolerance.
pub fn is_zero_with(e: &Expr, tol: f64, cfg: &ZeroTestConfig) -> ZeroTest {
    let probe_target = match clear_denominators(e) {
        Ok(c) if c.is_zero() => return ZeroTest::Zero,
        Ok(c) => c.numerator.to_expr(),
        Err(_) => e.clone(),
    };
    if e.contains_unknown() {
        return ZeroTest::Undecided;
    }
    let names: Vec<String> = e.symbols().into_iter().filter(|s| s != PI).collect();
    for point in probe_points(&names, cfg) {
        let Ok(v) = evaluate(&probe_target, &point) else { continue };
        let scale = probe_target
            .summands()
            .iter()
            .filter_map(|s| evaluate(s, &point).ok())
            .fold(1.0f64, |m, s| m.max(s.abs()));
        if v.abs() > tol * scale {
            if let Ok(value) = evaluate(e, &point) {
                return ZeroTest::NonZero { witness: point, value };
            }
        }
    }
    ZeroTest::Undecided
}

/// Whether `e` can be evaluated at any of the probe points.
pub fn evaluable(e: &Expr, cfg: &ZeroTestConfig) -> bool {
    let names: Vec<String> = e.symbols().into_iter().filter(|s| s != PI).collect();
    !e.contains_unknown() && probe_points(&names, cfg).iter().any(|p| evaluate(e, p).is_ok())
}

fn probe_points(names: &[String], cfg: &ZeroTestConfig) -> Vec<Point> {
    let fixed = [2.0, 1.0, 0.5];
    let mut out: Vec<Point> = fixed
        .iter()
        .map(|v| names.iter().map(|n| (n.clone(), *v)).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        out.push(names.iter().map(|n| (n.clone(), rng.gen_range(-2.0..2.0))).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::expr::parse;

    fn e(src: &str) -> Expr {
        parse(src, &Context::simple(&["x", "y"])).unwrap()
    }

    #[test]
    fn exact_and_witnessed_answers() {
        assert_eq!(is_zero(&e("sin(t)^2 + cos(t)^2 - 1"), 1e-12), ZeroTest::Zero);
        assert_eq!(is_zero(&e("x/(x^2+y^2) - x*(x^2+y^2)^(-1)"), 1e-12), ZeroTest::Zero);
        match is_zero(&e("x - y"), 1e-12) {
            ZeroTest::NonZero { witness, value } => {
                assert!((witness["x"] - witness["y"] - value).abs() < 1e-12);
                assert!(value.abs() > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn numeric_fallback_for_fractional_powers() {
        let z = is_zero(&e("(x^2)^(1/2)*(x^2)^(1/2) - x^2"), 1e-10);
        assert_eq!(z, ZeroTest::Undecided);
        assert!(matches!(is_zero(&e("x^(1/2) - 1"), 1e-10), ZeroTest::NonZero { .. }));
    }
}
