//! Hamiltonians, Noether first integrals and their symbolic drift.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{clear_denominators, is_zero_with, normalize, Expr, ZeroTestConfig};
use crate::geometry::Metric;
use crate::noether::{verify, ApproximateGenerator, PerturbedLagrangian};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Zeroth,
    First,
}

/// `H0 = ½ g ẋẋ + V0` or `H1 = ½ h ẋẋ + V1` (the latter without its ε).
pub fn hamiltonian(l: &PerturbedLagrangian, part: Part) -> Expr {
    match part {
        Part::Zeroth => l.kinetic(l.g()) + l.v0(),
        Part::First => l.kinetic(l.h()) + l.v1(),
    }
}

fn tidy(e: Expr) -> Expr {
    clear_denominators(&e).map(|c| c.to_expr()).unwrap_or(e)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstIntegral {
    pub name: String,
    pub order: usize,
    /// `parts[k]` multiplies `ε^k`.
    pub parts: Vec<Expr>,
    /// Lowest power of ε with a nonzero part.
    pub epsilon_power: usize,
    /// `Σ ε^(k − epsilon_power) parts[k]`, with ε written `eps`.
    pub expr: Expr,
}

impl FirstIntegral {
    pub fn from_parts(name: impl Into<String>, parts: Vec<Expr>) -> FirstIntegral {
        let order = parts.len().saturating_sub(1);
        let epsilon_power = parts.iter().position(|p| !p.is_zero_literal()).unwrap_or(0);
        let eps = Expr::sym(crate::context::EPSILON);
        let expr = Expr::add_all(
            parts
                .iter()
                .enumerate()
                .skip(epsilon_power)
                .map(|(k, p)| eps.powi((k - epsilon_power) as i64) * p),
        );
        FirstIntegral {
            name: name.into(),
            order,
            parts,
            epsilon_power,
            expr,
        }
    }

    /// The integral with ε folded in: `Σ ε^k parts[k]`.
    pub fn full(&self) -> Expr {
        let eps = Expr::sym(crate::context::EPSILON);
        Expr::add_all(self.parts.iter().enumerate().map(|(k, p)| eps.powi(k as i64) * p))
    }

    pub fn display(&self) -> String {
        match self.epsilon_power {
            0 => self.expr.to_string(),
            1 => format!("eps*({})", self.expr),
            k => format!("eps^{k}*({})", self.expr),
        }
    }
}

/// Noether integral of a generator, truncated at `ε^order`. The generator is
/// verified first; it must carry boundary terms.
pub fn first_integral(l: &PerturbedLagrangian, x: &ApproximateGenerator, order: usize, tol: f64, cfg: &ZeroTestConfig) -> Result<FirstIntegral> {
    if order > l.order() {
        return Err(Error::InvalidInput(format!("integral order {order} exceeds the generator order {}", l.order())));
    }
    let report = verify(l, x, tol, cfg)?;
    if !report.passed {
        return Err(Error::InvalidInput(format!("generator `{}` does not verify", x.name)));
    }
    let b = l.ctx().rational_bindings();
    let f: Vec<Expr> = report.boundary.iter().map(|e| e.substitute(&b)).collect();
    let v = l.velocities();
    let (h0, h1) = (hamiltonian(l, Part::Zeroth), hamiltonian(l, Part::First));
    let (p0, p1) = (l.g().lower(&v), l.h().lower(&v));
    let dot = |p: &[Expr], eta: &[Expr]| Expr::add_all(p.iter().zip(eta).map(|(a, e)| a * e.substitute(&b)));
    let mut parts = Vec::new();
    for k in 0..=order {
        let cur = &x.orders[k];
        let mut terms = vec![&h0 * cur.xi.substitute(&b), -dot(&p0, &cur.eta), f[k].clone()];
        if k > 0 {
            let prev = &x.orders[k - 1];
            terms.push(&h1 * prev.xi.substitute(&b));
            terms.push(-dot(&p1, &prev.eta));
        }
        parts.push(tidy(Expr::add_all(terms)));
    }
    Ok(FirstIntegral::from_parts(x.name.clone(), parts))
}

/// Inverse of the unperturbed mass matrix, when available in closed form.
fn inverse_metric(g: &Metric) -> Result<Vec<Vec<Expr>>> {
    let n = g.dimension();
    if g.is_diagonal() {
        return Ok((0..n)
            .map(|i| (0..n).map(|j| if i == j { g.get(i, i).recip() } else { Expr::zero() }).collect())
            .collect());
    }
    if g.is_constant() {
        let mut m = Vec::new();
        for i in 0..n {
            let mut row = Vec::new();
            for j in 0..n {
                let nf = normalize(g.get(i, j))?;
                row.push(nf.poly().as_constant().ok_or(Error::NumericOnly)?);
            }
            m.push(row);
        }
        let mut inv = vec![vec![Expr::zero(); n]; n];
        for c in 0..n {
            let rows = (0..n).map(|i| {
                let mut r: crate::linalg::SparseRow = (0..n).filter(|j| !m[i][*j].is_zero()).map(|j| (j, m[i][j].clone())).collect();
                if i == c {
                    r.insert(n, num_rational::BigRational::from_integer(1.into()));
                }
                r
            });
            let col = crate::linalg::solve_affine(rows, n).ok_or(Error::NumericOnly)?;
            for (i, v) in col.into_iter().enumerate() {
                inv[i][c] = Expr::num(v);
            }
        }
        return Ok(inv);
    }
    Err(Error::NumericOnly)
}

use num_traits::Zero;

/// Right-hand side `R` of `M ẍ = R` split as `R0 + ε R1`.
pub(crate) fn forces(l: &PerturbedLagrangian) -> (Vec<Expr>, Vec<Expr>) {
    let ctx = l.ctx();
    let v = l.velocities();
    let n = ctx.dimension();
    let side = |m: &Metric, pot: &Expr| -> Vec<Expr> {
        (0..n)
            .map(|i| {
                let xi = &ctx.coordinates()[i];
                let mut terms = vec![-pot.diff(xi)];
                for j in 0..n {
                    for k in 0..n {
                        let xk = &ctx.coordinates()[k];
                        terms.push(Expr::frac(1, 2) * m.get(j, k).diff(xi) * &v[j] * &v[k]);
                        terms.push(-(m.get(i, j).diff(xk)) * &v[k] * &v[j]);
                    }
                }
                Expr::add_all(terms)
            })
            .collect()
    };
    (side(l.g(), l.v0()), side(l.h(), l.v1()))
}

/// `ẍ = Σ ε^k A_k`, coefficients up to `ε^up_to`.
pub fn acceleration_series(l: &PerturbedLagrangian, up_to: usize) -> Result<Vec<Vec<Expr>>> {
    let ginv = inverse_metric(l.g())?;
    let n = l.dimension();
    let (r0, r1) = forces(l);
    let apply = |m: &[Vec<Expr>], v: &[Expr]| -> Vec<Expr> {
        (0..n).map(|i| Expr::add_all((0..n).map(|j| &m[i][j] * &v[j]))).collect()
    };
    let h = l.h().entries().clone();
    let mut out: Vec<Vec<Expr>> = vec![apply(&ginv, &r0).into_iter().map(tidy).collect()];
    for k in 1..=up_to {
        let hprev = apply(&h, &out[k - 1]);
        let rk: Vec<Expr> = (0..n)
            .map(|i| if k == 1 { &r1[i] - &hprev[i] } else { -hprev[i].clone() })
            .collect();
        out.push(apply(&ginv, &rk).into_iter().map(tidy).collect());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftExpansion {
    /// Coefficients of `ε^0 .. ε^order` in `dI/dt`.
    pub truncated: Vec<Expr>,
    /// Coefficient of `ε^(order+1)`.
    pub remainder: Expr,
}

impl DriftExpansion {
    pub fn truncation_vanishes(&self, tol: f64, cfg: &ZeroTestConfig) -> bool {
        self.truncated.iter().all(|e| {
            matches!(is_zero_with(e, tol, cfg), crate::expr::ZeroTest::Zero)
                || (!matches!(is_zero_with(e, tol, cfg), crate::expr::ZeroTest::NonZero { .. }) && crate::expr::evaluable(e, cfg))
        })
    }
}

/// `dI/dt` along the perturbed flow, expanded in ε.
pub fn symbolic_drift(l: &PerturbedLagrangian, integral: &FirstIntegral) -> Result<DriftExpansion> {
    let ctx = l.ctx();
    let gamma = integral.order;
    let acc = acceleration_series(l, gamma + 1)?;
    let vel = ctx.velocities();
    let coefficient = |m: usize| -> Expr {
        let mut terms = Vec::new();
        if m < integral.parts.len() {
            terms.push(integral.parts[m].total_time_derivative_unchecked(ctx));
        }
        for j in 0..=m.min(gamma) {
            if j >= integral.parts.len() {
                break;
            }
            let k = m - j;
            for (i, v) in vel.iter().enumerate() {
                terms.push(integral.parts[j].diff(v) * &acc[k][i]);
            }
        }
        tidy(Expr::add_all(terms))
    };
    Ok(DriftExpansion {
        truncated: (0..=gamma).map(coefficient).collect(),
        remainder: coefficient(gamma + 1),
    })
}
