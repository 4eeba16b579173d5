//! Metrics, Lie derivatives and homothetic vector fields.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{clear_denominators, evaluate, is_zero, Expr, Point};
use crate::linalg::{Echelon, SparseRow};

const SYMBOLIC_TOL: f64 = 1e-10;

pub type Tensor = Vec<Vec<Expr>>;

/// A symmetric, position-dependent (time-independent) bilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    entries: Tensor,
    warnings: Vec<String>,
}

impl Metric {
    /// Accepts either a full matrix or its lower triangle (row `i` holding
    /// `i + 1` entries). Full matrices must be symmetric.
    pub fn new(rows: Tensor, ctx: &Context) -> Result<Metric> {
        let n = ctx.dimension();
        if rows.len() != n {
            return Err(Error::DimensionMismatch(format!("metric has {} rows, expected {n}", rows.len())));
        }
        let lower = rows.iter().enumerate().all(|(i, r)| r.len() == i + 1);
        let full = rows.iter().all(|r| r.len() == n);
        if !lower && !full {
            return Err(Error::DimensionMismatch("metric rows must be a full matrix or a lower triangle".into()));
        }
        let mut entries = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                entries[i][j] = rows[i][j].clone();
                entries[j][i] = rows[i][j].clone();
            }
        }
        if full && !lower {
            for i in 0..n {
                for j in 0..i {
                    if !is_zero(&(&rows[i][j] - &rows[j][i]), SYMBOLIC_TOL).is_zero() {
                        return Err(Error::InvalidInput(format!("metric is not symmetric at ({i}, {j})")));
                    }
                }
            }
        }
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if let Some(bad) = e.symbols().into_iter().find(|s| !ctx.is_coordinate(s) && !ctx.parameters().contains_key(s) && s != crate::context::PI) {
                    return Err(Error::InvalidInput(format!("metric entry ({i}, {j}) depends on `{bad}`; only coordinates are allowed")));
                }
            }
        }
        let mut m = Metric { entries, warnings: Vec::new() };
        m.warnings = m.degeneracy_warnings(ctx);
        Ok(m)
    }

    pub fn identity(n: usize) -> Metric {
        let entries = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect())
            .collect();
        Metric { entries, warnings: Vec::new() }
    }

    pub fn zero(n: usize) -> Metric {
        Metric {
            entries: vec![vec![Expr::zero(); n]; n],
            warnings: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &Tensor {
        &self.entries
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| is_zero(e, SYMBOLIC_TOL).is_zero())
    }

    /// Whether every entry is a rational constant.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.symbols().is_empty())
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dimension();
        (0..n).all(|i| (0..n).all(|j| i == j || is_zero(&self.entries[i][j], SYMBOLIC_TOL).is_zero()))
    }

    pub fn substitute(&self, bindings: &BTreeMap<String, Expr>) -> Metric {
        Metric {
            entries: self.entries.iter().map(|r| r.iter().map(|e| e.substitute(bindings)).collect()).collect(),
            warnings: self.warnings.clone(),
        }
    }

    /// `g_ij a^i b^j`.
    pub fn contract(&self, a: &[Expr], b: &[Expr]) -> Expr {
        let n = self.dimension();
        Expr::add_all((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter_map(|(i, j)| {
            let g = &self.entries[i][j];
            (!g.is_zero_literal()).then(|| g * &a[i] * &b[j])
        }))
    }

    /// `g_ij v^i` as a covector.
    pub fn lower(&self, v: &[Expr]) -> Vec<Expr> {
        let n = self.dimension();
        (0..n)
            .map(|j| Expr::add_all((0..n).map(|i| &self.entries[i][j] * &v[i])))
            .collect()
    }

    pub fn numeric(&self, point: &Point) -> Result<Vec<Vec<f64>>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|e| evaluate(e, point)).collect())
            .collect()
    }

    fn degeneracy_warnings(&self, ctx: &Context) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d65_7472_6963);
        let mut out = Vec::new();
        for _ in 0..8 {
            let mut point = sample_parameters(ctx);
            for c in ctx.coordinates() {
                point.insert(c.clone(), rng.gen_range(0.5..2.0));
            }
            match self.numeric(&point).map(|m| determinant(&m)) {
                Ok(d) if d.abs() > 1e-8 => {}
                Ok(d) => out.push(format!("metric is degenerate (det = {d:e}) at {point:?}")),
                Err(e) => out.push(format!("metric could not be evaluated at {point:?}: {e}")),
            }
        }
        out
    }
}

/// Numeric values for parameters, with fixed stand-ins for symbolic ones.
pub(crate) fn sample_parameters(ctx: &Context) -> Point {
    ctx.parameters()
        .iter()
        .enumerate()
        .map(|(i, (k, v))| (k.clone(), v.as_f64().unwrap_or(0.7 + 0.1 * i as f64)))
        .collect()
}

pub fn determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Solves `m x = b` by partial-pivot elimination; `None` if singular.
pub fn solve_dense(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.iter().zip(b).map(|(r, v)| r.iter().copied().chain([*v]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// A vector field on configuration space, components in the coordinate basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialVectorField {
    pub components: Vec<Expr>,
}

impl SpatialVectorField {
    pub fn new(components: Vec<Expr>, ctx: &Context) -> Result<SpatialVectorField> {
        if components.len() != ctx.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "vector field has {} components, expected {}",
                components.len(),
                ctx.dimension()
            )));
        }
        Ok(SpatialVectorField { components })
    }

    /// `Y^k ∂_k`-style rendering.
    pub fn display(&self, ctx: &Context) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .zip(ctx.coordinates())
            .filter(|(c, _)| !c.is_zero_literal())
            .map(|(c, x)| format!("({c})*d/d{x}"))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// `[self, other]^i = self^k ∂_k other^i − other^k ∂_k self^i`.
    pub fn bracket(&self, other: &SpatialVectorField, ctx: &Context) -> SpatialVectorField {
        let coords = ctx.coordinates();
        let components = (0..coords.len())
            .map(|i| {
                Expr::add_all(coords.iter().enumerate().map(|(k, x)| {
                    &self.components[k] * other.components[i].diff(x) - &other.components[k] * self.components[i].diff(x)
                }))
            })
            .collect();
        SpatialVectorField { components }
    }
}

fn check_dims(n: usize, y: &SpatialVectorField, ctx: &Context) -> Result<()> {
    if n != y.components.len() || n != ctx.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "tensor of dimension {n}, field with {} components, context of dimension {}",
            y.components.len(),
            ctx.dimension()
        )));
    }
    Ok(())
}

/// Lie derivative of a symmetric covariant 2-tensor.
pub fn lie_derivative_tensor(t: &Tensor, y: &SpatialVectorField, ctx: &Context) -> Result<Tensor> {
    let n = t.len();
    check_dims(n, y, ctx)?;
    let coords = ctx.coordinates();
    let dy: Vec<Vec<Expr>> = y.components.iter().map(|c| coords.iter().map(|x| c.diff(x)).collect()).collect();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut terms = Vec::new();
            for k in 0..n {
                terms.push(&y.components[k] * t[i][j].diff(&coords[k]));
                terms.push(&t[k][j] * &dy[k][i]);
                terms.push(&t[i][k] * &dy[k][j]);
            }
            let v = Expr::add_all(terms);
            out[j][i] = v.clone();
            out[i][j] = v;
        }
    }
    Ok(out)
}

pub fn lie_derivative_metric(g: &Metric, y: &SpatialVectorField, ctx: &Context) -> Result<Tensor> {
    lie_derivative_tensor(&g.entries, y, ctx)
}

pub fn lie_derivative_scalar(v: &Expr, y: &SpatialVectorField, ctx: &Context) -> Expr {
    Expr::add_all(ctx.coordinates().iter().zip(&y.components).map(|(x, c)| c * v.diff(x)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HomotheticKind {
    Killing,
    Homothetic,
    NotHomothetic {
        residual: Tensor,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotheticResult {
    pub field: SpatialVectorField,
    #[serde(serialize_with = "crate::rational::serde_rational::serialize")]
    pub conformal_factor: BigRational,
    pub kind: HomotheticKind,
}

impl HomotheticResult {
    pub fn is_homothetic(&self) -> bool {
        !matches!(self.kind, HomotheticKind::NotHomothetic { .. })
    }
}

/// `2ψ` candidate from one component pair, `None` when the ratio is not a
/// rational constant.
fn ratio_candidate(lie: &Expr, g: &Expr) -> Option<BigRational> {
    let a = clear_denominators(lie).ok()?;
    let b = clear_denominators(g).ok()?;
    let expand = |f: &crate::expr::Cleared| {
        f.denominator.iter().fold(crate::expr::normal::Poly::one(), |acc, (p, k)| acc.mul(&p.pow(*k)))
    };
    let p = a.numerator.mul(&expand(&b));
    let q = b.numerator.mul(&expand(&a));
    let (pm, pc) = p.terms.iter().next()?;
    let (qm, qc) = q.terms.iter().next()?;
    (pm == qm).then(|| pc / qc)
}

pub fn check_homothetic(g: &Metric, y: &SpatialVectorField, ctx: &Context) -> Result<HomotheticResult> {
    let lie = lie_derivative_metric(g, y, ctx)?;
    let n = g.dimension();
    let mut two_psi = Some(BigRational::zero());
    'search: for i in 0..n {
        for j in 0..n {
            if is_zero(&g.entries[i][j], SYMBOLIC_TOL).is_zero() {
                continue;
            }
            two_psi = if is_zero(&lie[i][j], SYMBOLIC_TOL).is_zero() {
                Some(BigRational::zero())
            } else {
                ratio_candidate(&lie[i][j], &g.entries[i][j])
            };
            break 'search;
        }
    }
    let psi = two_psi.map(|r| r / BigRational::from_integer(2.into()));
    let scale = Expr::num(psi.clone().unwrap_or_else(BigRational::zero) * BigRational::from_integer(2.into()));
    let residual: Tensor = (0..n)
        .map(|i| (0..n).map(|j| &lie[i][j] - &scale * &g.entries[i][j]).collect())
        .collect();
    let vanishes = psi.is_some() && residual.iter().flatten().all(|e| is_zero(e, SYMBOLIC_TOL).is_zero());
    let psi = psi.unwrap_or_else(BigRational::zero);
    let kind = if !vanishes {
        HomotheticKind::NotHomothetic { residual }
    } else if psi.is_zero() {
        HomotheticKind::Killing
    } else {
        HomotheticKind::Homothetic
    };
    Ok(HomotheticResult {
        field: y.clone(),
        conformal_factor: if vanishes { psi } else { BigRational::zero() },
        kind,
    })
}

/// Monomials in `vars` of total degree ≤ `degree`, ordered by degree then
/// lexicographically by exponent vector (descending in the first variable).
pub fn monomials(vars: &[String], degree: u32) -> Vec<Expr> {
    fn exponents(n: usize, total: u32) -> Vec<Vec<u32>> {
        if n == 0 {
            return if total == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        for first in (0..=total).rev() {
            for mut rest in exponents(n - 1, total - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    (0..=degree)
        .flat_map(|d| exponents(vars.len(), d))
        .map(|e| Expr::mul_all(vars.iter().zip(e).map(|(v, k)| Expr::sym(v.clone()).powi(k as i64))))
        .collect()
}

/// Basis of polynomial homothetic fields of degree ≤ `degree`; Killing fields
/// come first, followed by at most one proper homothety.
pub fn solve_homothetic(g: &Metric, degree: u32, ctx: &Context) -> Result<Vec<HomotheticResult>> {
    if degree < 1 {
        return Err(Error::InvalidInput("homothetic ansatz degree must be at least 1".into()));
    }
    let n = g.dimension();
    let g = g.substitute(&ctx.rational_bindings());
    for (i, row) in g.entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate().take(i + 1) {
            let polynomial = clear_denominators(e).is_ok_and(|c| {
                c.numerator.is_polynomial_in(ctx.coordinates())
                    && c.denominator.keys().all(|d| d.is_polynomial_in(ctx.coordinates()))
            });
            if !polynomial {
                return Err(Error::Unsupported(format!("metric entry ({i}, {j}) = `{e}` is not polynomial")));
            }
        }
    }
    let monos = monomials(ctx.coordinates(), degree);
    let psi_col = 0usize;
    let mut unknowns = BTreeMap::new();
    unknowns.insert("_psi".to_string(), psi_col);
    let mut components = Vec::new();
    for i in 0..n {
        let mut terms = Vec::new();
        for (k, m) in monos.iter().enumerate() {
            let name = format!("_c{i}_{k}");
            unknowns.insert(name.clone(), 1 + i * monos.len() + k);
            terms.push(Expr::sym(name) * m);
        }
        components.push(Expr::add_all(terms));
    }
    let columns = 1 + n * monos.len();
    let field = SpatialVectorField { components };
    let lie = lie_derivative_metric(&g, &field, ctx)?;
    let two_psi = Expr::int(2) * Expr::sym("_psi");
    let mut rows: Vec<SparseRow> = Vec::new();
    for i in 0..n {
        for j in 0..=i {
            let eq = &lie[i][j] - &two_psi * &g.entries[i][j];
            for r in clear_denominators(&eq)?.numerator.collect_linear(&unknowns)? {
                rows.push(r.coefficients);
            }
        }
    }
    let build = |v: &[BigRational]| -> SpatialVectorField {
        let components = (0..n)
            .map(|i| {
                Expr::add_all(
                    monos
                        .iter()
                        .enumerate()
                        .map(|(k, m)| Expr::num(v[1 + i * monos.len() + k].clone()) * m),
                )
            })
            .collect();
        SpatialVectorField { components }
    };
    let mut killing = Echelon::new(columns);
    for r in &rows {
        killing.push(r.clone());
    }
    let mut with_psi = killing.clone();
    let mut psi_row = SparseRow::new();
    psi_row.insert(psi_col, BigRational::from_integer(1.into()));
    with_psi.push(psi_row.clone());
    let mut out = Vec::new();
    for v in with_psi.nullspace() {
        out.push(HomotheticResult {
            field: build(&v),
            conformal_factor: BigRational::zero(),
            kind: HomotheticKind::Killing,
        });
    }
    // A proper homothety exists iff ψ = 1 is consistent.
    let mut aug: Vec<SparseRow> = rows.clone();
    let mut fix = psi_row;
    fix.insert(columns, BigRational::from_integer(1.into()));
    aug.push(fix);
    if let Some(v) = crate::linalg::solve_affine(aug, columns) {
        out.push(HomotheticResult {
            field: build(&v),
            conformal_factor: v[psi_col].clone(),
            kind: HomotheticKind::Homothetic,
        });
    }
    Ok(out)
}
