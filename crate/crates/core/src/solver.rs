//! Linear-algebraic solution of the determining equations over a declared
//! ansatz.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{clear_denominators, evaluate, Expr};
use crate::geometry::{monomials, sample_parameters};
use crate::linalg::{span_coefficients, Echelon, SparseRow};
use crate::noether::{build_conditions, ApproximateGenerator, GeneratorOrder, PerturbedLagrangian};

pub const MAX_UNKNOWNS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzSpec {
    pub time_basis: Vec<Expr>,
    pub spatial_degree: u32,
    /// Extra spatial monomials such as `x^(-1)`, used for η and f.
    pub inverse_powers: Vec<Expr>,
}

impl AnsatzSpec {
    pub fn new(time_basis: Vec<Expr>, spatial_degree: u32) -> Self {
        AnsatzSpec {
            time_basis,
            spatial_degree,
            inverse_powers: Vec::new(),
        }
    }

    /// Rejects empty or dependent bases and basis functions of anything but
    /// time and parameters.
    pub fn validate(&self, ctx: &Context) -> Result<()> {
        if self.time_basis.is_empty() {
            return Err(Error::InvalidInput("ansatz time basis is empty".into()));
        }
        for b in &self.time_basis {
            if let Some(s) = b.symbols().into_iter().find(|s| s != ctx.time() && !ctx.parameters().contains_key(s) && s != crate::context::PI) {
                return Err(Error::InvalidInput(format!("time basis function `{b}` depends on `{s}`")));
            }
        }
        for m in &self.inverse_powers {
            if let Some(s) = m.symbols().into_iter().find(|s| !ctx.is_coordinate(s)) {
                return Err(Error::InvalidInput(format!("spatial monomial `{m}` depends on `{s}`")));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x7772_6f6e);
        let mut points = Vec::new();
        let params = sample_parameters(ctx);
        for _ in 0..8 {
            let mut p = params.clone();
            p.insert(ctx.time().to_string(), rng.gen_range(0.5..2.5));
            points.push(p);
        }
        let t = ctx.time();
        let derivs: Vec<Expr> = self.time_basis.iter().map(|b| b.diff(t)).collect();
        for i in 0..self.time_basis.len() {
            for j in i + 1..self.time_basis.len() {
                let w = &self.time_basis[i] * &derivs[j] - &self.time_basis[j] * &derivs[i];
                let independent = points.iter().any(|p| evaluate(&w, p).is_ok_and(|v| v.abs() > 1e-9));
                if !independent {
                    return Err(Error::InvalidInput(format!(
                        "time basis functions `{}` and `{}` are linearly dependent",
                        self.time_basis[i], self.time_basis[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Column meaning in the unknown vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "part", rename_all = "snake_case")]
pub enum Slot {
    Xi { order: usize },
    Eta { order: usize, component: usize },
    Boundary { order: usize },
}

/// A generator template linear in unknown coefficient symbols.
#[derive(Debug, Clone)]
pub struct Instantiation {
    pub template: ApproximateGenerator,
    pub unknowns: Vec<String>,
    pub slots: Vec<Slot>,
    /// `basis_term[k]` is the function multiplying unknown `k`.
    pub basis_terms: Vec<Expr>,
}

impl Instantiation {
    pub fn columns(&self) -> usize {
        self.unknowns.len()
    }

    fn index(&self) -> BTreeMap<String, usize> {
        self.unknowns.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
    }

    /// Generator for one coefficient vector.
    pub fn generator(&self, name: impl Into<String>, values: &[BigRational], n: usize) -> ApproximateGenerator {
        let orders = self.template.orders.len();
        let mut xi = vec![Vec::new(); orders];
        let mut eta = vec![vec![Vec::new(); n]; orders];
        let mut f = vec![Vec::new(); orders];
        for (k, v) in values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let term = Expr::num(v.clone()) * &self.basis_terms[k];
            match self.slots[k] {
                Slot::Xi { order } => xi[order].push(term),
                Slot::Eta { order, component } => eta[order][component].push(term),
                Slot::Boundary { order } => f[order].push(term),
            }
        }
        let tidy = |terms: Vec<Expr>| {
            let e = Expr::add_all(terms);
            clear_denominators(&e).map(|c| c.to_expr()).unwrap_or(e)
        };
        ApproximateGenerator::new(
            name,
            xi.into_iter()
                .zip(eta)
                .map(|(x, e)| GeneratorOrder {
                    xi: tidy(x),
                    eta: e.into_iter().map(tidy).collect(),
                })
                .collect(),
            Some(f.into_iter().map(tidy).collect()),
        )
    }
}

fn require_numeric(l: &PerturbedLagrangian) -> Result<()> {
    let symbolic = l.ctx().symbolic_parameters();
    let mut exprs = vec![l.v0().clone(), l.v1().clone()];
    exprs.extend(l.g().entries().iter().flatten().cloned());
    exprs.extend(l.h().entries().iter().flatten().cloned());
    for e in &exprs {
        if let Some(p) = symbolic.iter().find(|p| e.contains_symbol(p)) {
            return Err(Error::Unsupported(format!(
                "parameter `{p}` appears in the Lagrangian; bind it to a rational value to solve"
            )));
        }
    }
    Ok(())
}

pub fn instantiate(l: &PerturbedLagrangian, spec: &AnsatzSpec) -> Result<Instantiation> {
    let ctx = l.ctx();
    spec.validate(ctx)?;
    require_numeric(l)?;
    let n = ctx.dimension();
    let mut eta_monos = monomials(ctx.coordinates(), spec.spatial_degree);
    eta_monos.extend(spec.inverse_powers.iter().cloned());
    let mut f_monos = monomials(ctx.coordinates(), spec.spatial_degree + 1);
    f_monos.extend(spec.inverse_powers.iter().cloned());
    let b = spec.time_basis.len();
    let per_order = b + n * b * eta_monos.len() + b * f_monos.len();
    let total = per_order * (l.order() + 1);
    if total > MAX_UNKNOWNS {
        return Err(Error::InvalidInput(format!(
            "ansatz too large: {total} unknowns ({} orders x ({b} xi + {n}x{b}x{} eta + {b}x{} f)), limit {MAX_UNKNOWNS}",
            l.order() + 1,
            eta_monos.len(),
            f_monos.len()
        )));
    }
    let bindings = ctx.rational_bindings();
    let basis: Vec<Expr> = spec.time_basis.iter().map(|e| e.substitute(&bindings)).collect();
    let mut unknowns = Vec::with_capacity(total);
    let mut slots = Vec::with_capacity(total);
    let mut basis_terms = Vec::with_capacity(total);
    let mut orders = Vec::new();
    let mut boundary = Vec::new();
    let mut push = |slot: Slot, term: Expr, acc: &mut Vec<Expr>| {
        let name = format!("_a{}", unknowns.len());
        acc.push(Expr::sym(name.clone()) * &term);
        unknowns.push(name);
        slots.push(slot);
        basis_terms.push(term);
    };
    for a in 0..=l.order() {
        let mut xi = Vec::new();
        for tb in &basis {
            push(Slot::Xi { order: a }, tb.clone(), &mut xi);
        }
        let mut eta = Vec::new();
        for i in 0..n {
            let mut comp = Vec::new();
            for tb in &basis {
                for m in &eta_monos {
                    push(Slot::Eta { order: a, component: i }, tb * m, &mut comp);
                }
            }
            eta.push(Expr::add_all(comp));
        }
        let mut f = Vec::new();
        for tb in &basis {
            for m in &f_monos {
                push(Slot::Boundary { order: a }, tb * m, &mut f);
            }
        }
        orders.push(GeneratorOrder { xi: Expr::add_all(xi), eta });
        boundary.push(Expr::add_all(f));
    }
    Ok(Instantiation {
        template: ApproximateGenerator::new("ansatz", orders, Some(boundary)),
        unknowns,
        slots,
        basis_terms,
    })
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub rows: Vec<SparseRow>,
    pub columns: usize,
}

/// Substitutes the template into every determining equation and collects
/// one homogeneous row per independent monomial.
pub fn reduce(l: &PerturbedLagrangian, inst: &Instantiation) -> Result<LinearSystem> {
    let system = build_conditions(l);
    let bindings = inst.template.bindings();
    let index = inst.index();
    let components: Vec<(String, Expr)> = system
        .conditions
        .iter()
        .flat_map(|c| {
            c.components.iter().map(move |comp| {
                let id = format!(
                    "eps^{} {}{:?}",
                    c.order,
                    c.kind.label(),
                    comp.index.iter().map(|i| i + 1).collect::<Vec<_>>()
                );
                (id, comp.lhs.clone())
            })
        })
        .collect();
    let blocks: Vec<Result<Vec<SparseRow>>> = components
        .par_iter()
        .map(|(id, lhs)| {
            let e = lhs.substitute_unknowns(&bindings);
            let c = clear_denominators(&e).map_err(|err| Error::Unsupported(format!("equation {id}: {err}")))?;
            let rows = c
                .numerator
                .collect_linear(&index)
                .map_err(|err| Error::Unsupported(format!("equation {id}: {err}")))?;
            let mut out = Vec::with_capacity(rows.len());
            for r in rows {
                if !r.constant.is_zero() {
                    return Err(Error::Unsupported(format!("equation {id} is not homogeneous in the unknowns")));
                }
                out.push(r.coefficients);
            }
            Ok(out)
        })
        .collect();
    let mut rows = Vec::new();
    for b in blocks {
        rows.extend(b?);
    }
    Ok(LinearSystem {
        rows,
        columns: inst.columns(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionBasis {
    pub generators: Vec<ApproximateGenerator>,
    pub nullspace_dim: usize,
    pub gauge_note: String,
    #[serde(skip)]
    pub vectors: Vec<Vec<BigRational>>,
}

fn is_gauge(v: &[BigRational], slots: &[Slot]) -> bool {
    v.iter()
        .zip(slots)
        .all(|(c, s)| c.is_zero() || matches!(s, Slot::Boundary { .. }))
}

fn lowest_order(v: &[BigRational], slots: &[Slot]) -> usize {
    v.iter()
        .zip(slots)
        .filter(|(c, s)| !c.is_zero() && !matches!(s, Slot::Boundary { .. }))
        .map(|(_, s)| match s {
            Slot::Xi { order } | Slot::Eta { order, .. } | Slot::Boundary { order } => *order,
        })
        .min()
        .unwrap_or(usize::MAX)
}

/// Exact nullspace, with pure-gauge solutions removed and generators sorted
/// by (lowest nonzero order, coefficient vector).
pub fn nullspace(l: &PerturbedLagrangian, inst: &Instantiation, sys: &LinearSystem) -> SolutionBasis {
    let mut e = Echelon::new(sys.columns);
    for r in &sys.rows {
        e.push(r.clone());
    }
    let all = e.nullspace();
    let dim = all.len();
    let mut kept: Vec<Vec<BigRational>> = all.into_iter().filter(|v| !is_gauge(v, &inst.slots)).collect();
    let removed = dim - kept.len();
    kept.sort_by(|a, b| {
        lowest_order(a, &inst.slots)
            .cmp(&lowest_order(b, &inst.slots))
            .then_with(|| b.cmp(a))
    });
    let generators = kept
        .iter()
        .enumerate()
        .map(|(i, v)| inst.generator(format!("S{}", i + 1), v, l.dimension()))
        .collect();
    SolutionBasis {
        generators,
        nullspace_dim: dim,
        gauge_note: format!("{removed} pure-gauge solutions (xi = 0, eta = 0, f constant) removed"),
        vectors: kept,
    }
}

pub fn solve(l: &PerturbedLagrangian, spec: &AnsatzSpec) -> Result<SolutionBasis> {
    let inst = instantiate(l, spec)?;
    let sys = reduce(l, &inst)?;
    Ok(nullspace(l, &inst, &sys))
}

/// Coordinates of `x`'s ξ and η parts in the ansatz; `None` when `x` is not
/// expressible in it.
pub fn ansatz_coordinates(l: &PerturbedLagrangian, inst: &Instantiation, x: &ApproximateGenerator) -> Result<Option<Vec<BigRational>>> {
    x.check_shape(&l.with_order(inst.template.orders.len() - 1)?)?;
    let bindings = l.ctx().rational_bindings();
    let index = inst.index();
    let mut rows: Vec<SparseRow> = Vec::new();
    let columns = inst.columns();
    for (tmpl, given) in inst.template.orders.iter().zip(&x.orders) {
        let pairs = std::iter::once((&tmpl.xi, &given.xi)).chain(tmpl.eta.iter().zip(&given.eta));
        for (t, g) in pairs {
            let diff = t - g.substitute(&bindings);
            let c = clear_denominators(&diff)?;
            for r in c.numerator.collect_linear(&index)? {
                let mut row = r.coefficients;
                if !r.constant.is_zero() {
                    row.insert(columns, -r.constant);
                }
                rows.push(row);
            }
        }
    }
    // Boundary columns are left free; pin them to zero.
    for (k, s) in inst.slots.iter().enumerate() {
        if matches!(s, Slot::Boundary { .. }) {
            rows.push(SparseRow::from([(k, BigRational::from_integer(1.into()))]));
        }
    }
    Ok(crate::linalg::solve_affine(rows, columns))
}

/// Whether `x` lies in the span of the solution basis (ξ and η parts).
pub fn span_contains(l: &PerturbedLagrangian, inst: &Instantiation, basis: &SolutionBasis, x: &ApproximateGenerator) -> Result<bool> {
    let Some(target) = ansatz_coordinates(l, inst, x)? else { return Ok(false) };
    let keep: Vec<usize> = (0..inst.columns())
        .filter(|k| !matches!(inst.slots[*k], Slot::Boundary { .. }))
        .collect();
    let project = |v: &[BigRational]| keep.iter().map(|k| v[*k].clone()).collect::<Vec<_>>();
    let projected: Vec<Vec<BigRational>> = basis.vectors.iter().map(|v| project(v)).collect();
    Ok(span_coefficients(&projected, &project(&target)).is_some())
}
