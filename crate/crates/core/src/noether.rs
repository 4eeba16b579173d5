//! Approximate Noether determining equations, verification and boundary
//! terms.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::integrate::antiderivative;
use crate::expr::{clear_denominators, evaluable, is_zero_with, Expr, Point, ZeroTest, ZeroTestConfig};
use crate::geometry::{check_homothetic, lie_derivative_scalar, lie_derivative_tensor, HomotheticKind, Metric, SpatialVectorField, Tensor};

/// `L = L0 + ε L1` with `L0 = ½ g ẋẋ − V0` and `L1 = ½ h ẋẋ − V1`, expanded
/// to order `ε^order` in the generator.
#[derive(Debug, Clone)]
pub struct PerturbedLagrangian {
    ctx: Context,
    g: Metric,
    h: Metric,
    v0: Expr,
    v1: Expr,
    order: usize,
}

fn check_configuration(e: &Expr, ctx: &Context, what: &str) -> Result<()> {
    match e.symbols().into_iter().find(|s| {
        !(s == ctx.time() || ctx.is_coordinate(s) || ctx.parameters().contains_key(s) || s == crate::context::PI)
    }) {
        Some(bad) => Err(Error::InvalidInput(format!("{what} may depend only on time, coordinates and parameters; found `{bad}`"))),
        None => Ok(()),
    }
}

impl PerturbedLagrangian {
    /// Rational parameters are substituted exactly; symbolic and float
    /// parameters stay symbols.
    pub fn new(ctx: Context, g: Metric, h: Metric, v0: Expr, v1: Expr, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidInput("perturbation order must be at least 1".into()));
        }
        let n = ctx.dimension();
        if g.dimension() != n || h.dimension() != n {
            return Err(Error::DimensionMismatch(format!("metrics must be {n}x{n}")));
        }
        check_configuration(&v0, &ctx, "V0")?;
        check_configuration(&v1, &ctx, "V1")?;
        let b = ctx.rational_bindings();
        Ok(PerturbedLagrangian {
            g: g.substitute(&b),
            h: h.substitute(&b),
            v0: v0.substitute(&b),
            v1: v1.substitute(&b),
            ctx,
            order,
        })
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn g(&self) -> &Metric {
        &self.g
    }

    pub fn h(&self) -> &Metric {
        &self.h
    }

    pub fn v0(&self) -> &Expr {
        &self.v0
    }

    pub fn v1(&self) -> &Expr {
        &self.v1
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dimension(&self) -> usize {
        self.ctx.dimension()
    }

    /// True when the perturbation is purely potential (`h ≡ 0`).
    pub fn h_is_zero(&self) -> bool {
        self.h.is_zero()
    }

    pub fn velocities(&self) -> Vec<Expr> {
        self.ctx.velocities().iter().map(|v| Expr::sym(v.clone())).collect()
    }

    pub fn kinetic(&self, m: &Metric) -> Expr {
        let v = self.velocities();
        Expr::frac(1, 2) * m.contract(&v, &v)
    }

    pub fn l0(&self) -> Expr {
        self.kinetic(&self.g) - &self.v0
    }

    pub fn l1(&self) -> Expr {
        self.kinetic(&self.h) - &self.v1
    }

    /// Same Lagrangian with the generator truncated at a different order.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidInput("perturbation order must be at least 1".into()));
        }
        Ok(PerturbedLagrangian { order, ..self.clone() })
    }

    /// Replaces parameters by exact values (used by solve mode).
    pub fn bind_parameters(&self, ctx: Context) -> Result<Self> {
        PerturbedLagrangian::new(ctx, self.g.clone(), self.h.clone(), self.v0.clone(), self.v1.clone(), self.order)
    }
}

/// One `ε^A` component of a generator: `ξ_A(t) ∂t + η_A^i(t, x) ∂i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorOrder {
    pub xi: Expr,
    pub eta: Vec<Expr>,
}

impl GeneratorOrder {
    pub fn zero(n: usize) -> GeneratorOrder {
        GeneratorOrder {
            xi: Expr::zero(),
            eta: vec![Expr::zero(); n],
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        self.xi.is_zero_literal() && self.eta.iter().all(Expr::is_zero_literal)
    }

    fn substitute(&self, b: &BTreeMap<String, Expr>) -> GeneratorOrder {
        GeneratorOrder {
            xi: self.xi.substitute(b),
            eta: self.eta.iter().map(|e| e.substitute(b)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximateGenerator {
    pub name: String,
    pub orders: Vec<GeneratorOrder>,
    pub boundary: Option<Vec<Expr>>,
}

impl ApproximateGenerator {
    pub fn new(name: impl Into<String>, orders: Vec<GeneratorOrder>, boundary: Option<Vec<Expr>>) -> Self {
        ApproximateGenerator {
            name: name.into(),
            orders,
            boundary,
        }
    }

    pub fn zero(name: impl Into<String>, n: usize, order: usize) -> Self {
        ApproximateGenerator::new(name, vec![GeneratorOrder::zero(n); order + 1], Some(vec![Expr::zero(); order + 1]))
    }

    pub fn with_boundary(mut self, f: Vec<Expr>) -> Self {
        self.boundary = Some(f);
        self
    }

    /// Lowest order with a nonzero component, if any.
    pub fn lowest_order(&self) -> Option<usize> {
        self.orders.iter().position(|o| {
            !o.xi.is_zero_literal() || o.eta.iter().any(|e| !e.is_zero_literal())
        })
    }

    pub fn check_shape(&self, l: &PerturbedLagrangian) -> Result<()> {
        let (n, order) = (l.dimension(), l.order());
        if self.orders.len() != order + 1 {
            return Err(Error::DimensionMismatch(format!(
                "generator `{}` has {} orders, expected {}",
                self.name,
                self.orders.len(),
                order + 1
            )));
        }
        if let Some(o) = self.orders.iter().find(|o| o.eta.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "generator `{}` has {} eta components, expected {n}",
                self.name,
                o.eta.len()
            )));
        }
        if let Some(f) = &self.boundary {
            if f.len() != order + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "generator `{}` has {} boundary terms, expected {}",
                    self.name,
                    f.len(),
                    order + 1
                )));
            }
            for e in f {
                check_configuration(e, l.ctx(), "boundary term")?;
            }
        }
        for o in &self.orders {
            check_configuration(&o.xi, l.ctx(), "xi")?;
            for e in &o.eta {
                check_configuration(e, l.ctx(), "eta")?;
            }
        }
        Ok(())
    }

    fn substitute(&self, b: &BTreeMap<String, Expr>) -> ApproximateGenerator {
        ApproximateGenerator {
            name: self.name.clone(),
            orders: self.orders.iter().map(|o| o.substitute(b)).collect(),
            boundary: self.boundary.as_ref().map(|f| f.iter().map(|e| e.substitute(b)).collect()),
        }
    }

    /// Bindings of the unknown-function names used by the determining system.
    pub fn bindings(&self) -> BTreeMap<String, Expr> {
        let mut out = BTreeMap::new();
        for (a, o) in self.orders.iter().enumerate() {
            out.insert(xi_name(a), o.xi.clone());
            for (i, e) in o.eta.iter().enumerate() {
                out.insert(eta_name(a, i), e.clone());
            }
        }
        if let Some(f) = &self.boundary {
            for (a, e) in f.iter().enumerate() {
                out.insert(f_name(a), e.clone());
            }
        }
        out
    }

    /// `Σ ε^A (ξ_A ∂t + η_A ∂i)` rendered with `eps`.
    pub fn display(&self, ctx: &Context) -> String {
        let mut parts = Vec::new();
        for (a, o) in self.orders.iter().enumerate() {
            let mut fields = Vec::new();
            if !o.xi.is_zero_literal() {
                fields.push(format!("({})*d/d{}", o.xi, ctx.time()));
            }
            for (e, x) in o.eta.iter().zip(ctx.coordinates()) {
                if !e.is_zero_literal() {
                    fields.push(format!("({e})*d/d{x}"));
                }
            }
            if fields.is_empty() {
                continue;
            }
            let body = fields.join(" + ");
            parts.push(match a {
                0 => body,
                1 => format!("eps*[{body}]"),
                _ => format!("eps^{a}*[{body}]"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

pub fn xi_name(order: usize) -> String {
    format!("xi{order}")
}

pub fn eta_name(order: usize, component: usize) -> String {
    format!("eta{order}_{}", component + 1)
}

pub fn f_name(order: usize) -> String {
    format!("f{order}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionKind {
    Metric,
    BoundaryGradient,
    Potential,
    XiSpatialConstancy,
}

impl ConditionKind {
    pub fn label(self) -> &'static str {
        match self {
            ConditionKind::Metric => "metric-condition",
            ConditionKind::BoundaryGradient => "boundary-gradient",
            ConditionKind::Potential => "potential-condition",
            ConditionKind::XiSpatialConstancy => "xi-spatial-constancy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionComponent {
    /// `(i, j)` for the metric condition, `(j)` for gradient and constancy
    /// conditions, empty for the potential condition.
    pub index: Vec<usize>,
    pub lhs: Expr,
    /// Product of the factors cleared before deciding the component.
    pub cleared_denominator: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub order: usize,
    pub kind: ConditionKind,
    pub components: Vec<ConditionComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminingSystem {
    pub conditions: Vec<Condition>,
}

impl DeterminingSystem {
    pub fn equation_count(&self) -> usize {
        self.conditions.iter().map(|c| c.components.len()).sum()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.conditions {
            for comp in &c.components {
                let idx = if comp.index.is_empty() {
                    String::new()
                } else {
                    format!("[{}]", comp.index.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","))
                };
                out.push_str(&format!("eps^{} {}{}: {} = 0\n", c.order, c.kind.label(), idx, comp.lhs));
            }
        }
        out
    }
}

fn unknown_order(ctx: &Context, a: usize) -> (Expr, SpatialVectorField, Expr) {
    let args = ctx.configuration_symbols();
    let xi = Expr::unknown(xi_name(a), &args);
    let eta = (0..ctx.dimension()).map(|i| Expr::unknown(eta_name(a, i), &args)).collect();
    let f = Expr::unknown(f_name(a), &args);
    (xi, SpatialVectorField { components: eta }, f)
}

fn with_denominator(lhs: Expr) -> ConditionComponent {
    let cleared_denominator = clear_denominators(&lhs)
        .ok()
        .filter(|c| !c.denominator.is_empty())
        .map(|c| c.denominator_expr());
    ConditionComponent {
        index: Vec::new(),
        lhs,
        cleared_denominator,
    }
}

fn scale_tensor(t: &Tensor, s: &Expr) -> Tensor {
    t.iter().map(|r| r.iter().map(|e| s * e).collect()).collect()
}

/// Potential condition terms of one generator order against one potential:
/// `L_η V + ξ V_t + ξ_t V`.
fn potential_terms(v: &Expr, xi: &Expr, eta: &SpatialVectorField, ctx: &Context) -> Expr {
    let t = ctx.time();
    lie_derivative_scalar(v, eta, ctx) + xi * v.diff(t) + xi.diff(t) * v
}

pub fn build_conditions(l: &PerturbedLagrangian) -> DeterminingSystem {
    let ctx = l.ctx();
    let n = ctx.dimension();
    let t = ctx.time();
    let mut conditions = Vec::new();
    for a in 0..=l.order() {
        let (xi, eta, f) = unknown_order(ctx, a);
        let prev = (a > 0).then(|| unknown_order(ctx, a - 1));

        let mut metric = lie_derivative_metric_unchecked(l.g().entries(), &eta, ctx);
        let gt = scale_tensor(l.g().entries(), &xi.diff(t));
        let mut extra: Option<(Tensor, Tensor)> = None;
        if let Some((pxi, peta, _)) = &prev {
            extra = Some((
                lie_derivative_metric_unchecked(l.h().entries(), peta, ctx),
                scale_tensor(l.h().entries(), &pxi.diff(t)),
            ));
        }
        let mut comps = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let mut e = &metric[i][j] - &gt[i][j];
                if let Some((lh, ht)) = &extra {
                    e = e + &lh[i][j] - &ht[i][j];
                }
                let mut c = with_denominator(e);
                c.index = vec![i, j];
                comps.push(c);
            }
        }
        metric.clear();
        conditions.push(Condition { order: a, kind: ConditionKind::Metric, components: comps });

        let mut comps = Vec::new();
        for j in 0..n {
            let mut terms: Vec<Expr> = (0..n).map(|i| l.g().get(i, j) * eta.components[i].diff(t)).collect();
            if let Some((_, peta, _)) = &prev {
                terms.extend((0..n).map(|i| l.h().get(i, j) * peta.components[i].diff(t)));
            }
            terms.push(-f.diff(&ctx.coordinates()[j]));
            let mut c = with_denominator(Expr::add_all(terms));
            c.index = vec![j];
            comps.push(c);
        }
        conditions.push(Condition { order: a, kind: ConditionKind::BoundaryGradient, components: comps });

        let mut pot = potential_terms(l.v0(), &xi, &eta, ctx) + f.diff(t);
        if let Some((pxi, peta, _)) = &prev {
            pot = pot + potential_terms(l.v1(), pxi, peta, ctx);
        }
        conditions.push(Condition { order: a, kind: ConditionKind::Potential, components: vec![with_denominator(pot)] });

        let comps = ctx
            .coordinates()
            .iter()
            .enumerate()
            .map(|(k, x)| ConditionComponent {
                index: vec![k],
                lhs: xi.diff(x),
                cleared_denominator: None,
            })
            .collect();
        conditions.push(Condition { order: a, kind: ConditionKind::XiSpatialConstancy, components: comps });
    }
    DeterminingSystem { conditions }
}

fn lie_derivative_metric_unchecked(t: &Tensor, y: &SpatialVectorField, ctx: &Context) -> Tensor {
    lie_derivative_tensor(t, y, ctx).expect("dimensions fixed by the context")
}

/// `X^[1] L = ξ L_t + η^i L_i + (η̇^i − ẋ^i ξ̇) L_{ẋ^i}`.
pub fn prolong_apply(ctx: &Context, x: &GeneratorOrder, lpart: &Expr) -> Result<Expr> {
    if let Ok(c) = clear_denominators(lpart) {
        let vel = ctx.velocities().to_vec();
        let degree = c.numerator.terms.keys().map(|m| m.degree_in(&vel)).max().unwrap_or(0);
        if degree > 2 || c.denominator.keys().any(|f| vel.iter().any(|v| f.mentions(v))) {
            return Err(Error::Unsupported(format!("Lagrangian term `{lpart}` is not quadratic in velocities")));
        }
    }
    let t = ctx.time();
    let xi_dot = x.xi.total_time_derivative(ctx)?;
    let mut terms = vec![&x.xi * lpart.diff(t)];
    for ((q, v), eta) in ctx.coordinates().iter().zip(ctx.velocities()).zip(&x.eta) {
        terms.push(eta * lpart.diff(q));
        let eta_dot = eta.total_time_derivative(ctx)?;
        terms.push((eta_dot - Expr::sym(v.clone()) * &xi_dot) * lpart.diff(v));
    }
    Ok(Expr::add_all(terms))
}

/// Coefficient of `ε^order` in `X^[1]L + L ξ̇ − ḟ` for `L = L0 + εL1`.
pub fn noether_residual(l: &PerturbedLagrangian, x: &ApproximateGenerator, order: usize) -> Result<Expr> {
    let ctx = l.ctx();
    let f = x
        .boundary
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("generator `{}` has no boundary terms", x.name)))?;
    let cur = &x.orders[order];
    let (l0, l1) = (l.l0(), l.l1());
    let mut terms = vec![
        prolong_apply(ctx, cur, &l0)?,
        &l0 * cur.xi.total_time_derivative(ctx)?,
        -f[order].total_time_derivative(ctx)?,
    ];
    if order > 0 {
        let prev = &x.orders[order - 1];
        terms.push(prolong_apply(ctx, prev, &l1)?);
        terms.push(&l1 * prev.xi.total_time_derivative(ctx)?);
    }
    Ok(Expr::add_all(terms))
}

fn tidy(e: &Expr) -> Expr {
    clear_denominators(e).map(|c| c.to_expr()).unwrap_or_else(|_| e.clone())
}

/// Recovers `f_A` from the gradient and potential conditions, up to an
/// additive constant (fixed to zero).
pub fn recover_boundary_terms(l: &PerturbedLagrangian, x: &ApproximateGenerator, tol: f64, cfg: &ZeroTestConfig) -> Result<Vec<Expr>> {
    let probe = ApproximateGenerator {
        boundary: None,
        ..x.clone()
    };
    probe.check_shape(l)?;
    let x = probe.substitute(&l.ctx().rational_bindings());
    let ctx = l.ctx();
    let n = ctx.dimension();
    let t = ctx.time().to_string();
    let coords = ctx.coordinates().to_vec();
    let mut out = Vec::new();
    for a in 0..=l.order() {
        let cur = &x.orders[a];
        let eta = SpatialVectorField { components: cur.eta.clone() };
        let mut grad: Vec<Expr> = (0..n)
            .map(|j| Expr::add_all((0..n).map(|i| l.g().get(i, j) * cur.eta[i].diff(&t))))
            .collect();
        let mut pot = potential_terms(l.v0(), &cur.xi, &eta, ctx);
        if a > 0 {
            let prev = &x.orders[a - 1];
            for (j, gj) in grad.iter_mut().enumerate() {
                *gj = gj.clone() + Expr::add_all((0..n).map(|i| l.h().get(i, j) * prev.eta[i].diff(&t)));
            }
            let peta = SpatialVectorField { components: prev.eta.clone() };
            pot = pot + potential_terms(l.v1(), &prev.xi, &peta, ctx);
        }
        // Components of df in the order (x^1, ..., x^n, t).
        let mut vars = coords.clone();
        vars.push(t.clone());
        let mut parts = grad;
        parts.push(-pot);
        let parts: Vec<Expr> = parts.iter().map(tidy).collect();
        for p in 0..vars.len() {
            for q in p + 1..vars.len() {
                let d = parts[p].diff(&vars[q]) - parts[q].diff(&vars[p]);
                if let ZeroTest::NonZero { .. } = is_zero_with(&d, tol, cfg) {
                    return Err(Error::Incompatible {
                        order: a,
                        first: format!("d/d{} of df/d{}", vars[q], vars[p]),
                        second: format!("d/d{} of df/d{}", vars[p], vars[q]),
                    });
                }
            }
        }
        let mut f = Expr::zero();
        for (v, part) in vars.iter().zip(&parts) {
            let rest = tidy(&(part - f.diff(v)));
            if is_zero_with(&rest, tol, cfg).is_zero() {
                continue;
            }
            f = f + antiderivative(&rest, v)?;
        }
        let f = match clear_denominators(&f) {
            Ok(c) => c.without_constant().to_expr(),
            Err(_) => f,
        };
        out.push(f);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ZeroStatus {
    /// Decided zero exactly on the normal form.
    Symbolic,
    /// Outside the normal-form class; every probe below tolerance.
    Numeric,
    Failed { witness: Point, value: f64 },
    /// Could not be evaluated at any probe point.
    Indeterminate,
}

impl ZeroStatus {
    pub fn passed(&self) -> bool {
        matches!(self, ZeroStatus::Symbolic | ZeroStatus::Numeric)
    }
}

pub fn decide(e: &Expr, tol: f64, cfg: &ZeroTestConfig) -> ZeroStatus {
    match is_zero_with(e, tol, cfg) {
        ZeroTest::Zero => ZeroStatus::Symbolic,
        ZeroTest::NonZero { witness, value } => ZeroStatus::Failed { witness, value },
        ZeroTest::Undecided if evaluable(e, cfg) => ZeroStatus::Numeric,
        ZeroTest::Undecided => ZeroStatus::Indeterminate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationStatus {
    pub order: usize,
    pub kind: String,
    pub index: Vec<usize>,
    pub residual: Expr,
    #[serde(flatten)]
    pub status: ZeroStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Classification {
    Exact,
    Approximate { order: usize },
}

/// Spatial factor of one time-dependent piece of `η_A`, checked against the
/// homothetic algebra of `g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotheticFactor {
    pub order: usize,
    pub time_factor: Expr,
    pub field: Vec<Expr>,
    #[serde(serialize_with = "crate::rational::serde_rational::serialize")]
    pub conformal_factor: num_rational::BigRational,
    pub kind: HomotheticKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub passed: bool,
    pub classification: Classification,
    pub boundary: Vec<Expr>,
    pub boundary_recovered: bool,
    pub equations: Vec<EquationStatus>,
    /// Direct check of the full Noether identity at each order.
    pub noether_identity: Vec<EquationStatus>,
    pub homothetic_factors: Vec<HomotheticFactor>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &EquationStatus> {
        self.equations.iter().chain(&self.noether_identity).filter(|e| !e.status.passed())
    }
}

/// Splits each `η_A` into `Σ T(t) Y(x)` and checks every `Y`.
pub fn homothetic_factors(l: &PerturbedLagrangian, x: &ApproximateGenerator) -> Result<Vec<HomotheticFactor>> {
    let ctx = l.ctx();
    let coords = ctx.coordinates().to_vec();
    let mut out = Vec::new();
    for (a, o) in x.orders.iter().enumerate() {
        let mut pieces: BTreeMap<String, (Expr, Vec<Expr>)> = BTreeMap::new();
        for (i, e) in o.eta.iter().enumerate() {
            let cleared = clear_denominators(e)?;
            let d = cleared.denominator_expr();
            let d_spatial = coords.iter().any(|c| d.contains_symbol(c));
            if d_spatial && d.symbols().iter().any(|s| !coords.contains(s)) {
                return Err(Error::Unsupported(format!("denominator `{d}` mixes time and position")));
            }
            for (tm, sp) in cleared.numerator.split_spatial(&coords)? {
                let (tf, field) = if d_spatial { (tm.to_expr(), sp.to_expr() / &d) } else { (tm.to_expr() / &d, sp.to_expr()) };
                let tf = clear_denominators(&tf)?.to_expr();
                let slot = pieces.entry(tf.to_string()).or_insert_with(|| (tf, vec![Expr::zero(); coords.len()]));
                slot.1[i] = field;
            }
        }
        for (tf, field) in pieces.into_values() {
            let y = SpatialVectorField { components: field.clone() };
            let r = check_homothetic(l.g(), &y, ctx)?;
            out.push(HomotheticFactor {
                order: a,
                time_factor: tf,
                field,
                conformal_factor: r.conformal_factor,
                kind: r.kind,
            });
        }
    }
    Ok(out)
}

pub fn verify(l: &PerturbedLagrangian, x: &ApproximateGenerator, tol: f64, cfg: &ZeroTestConfig) -> Result<VerificationReport> {
    x.check_shape(l)?;
    let mut notes = Vec::new();
    let mut unrecoverable = false;
    let (x, boundary_recovered) = match &x.boundary {
        Some(_) => (x.substitute(&l.ctx().rational_bindings()), false),
        None => match recover_boundary_terms(l, x, tol, cfg) {
            Ok(f) => (x.substitute(&l.ctx().rational_bindings()).with_boundary(f), true),
            Err(e @ Error::Incompatible { .. }) => {
                // No boundary term exists; checking with f = 0 still yields witnesses.
                notes.push(e.to_string());
                unrecoverable = true;
                let zeros = vec![Expr::zero(); l.order() + 1];
                (x.substitute(&l.ctx().rational_bindings()).with_boundary(zeros), false)
            }
            Err(e) => return Err(e),
        },
    };
    let bindings = x.bindings();
    let system = build_conditions(l);
    let mut equations = Vec::new();
    for c in &system.conditions {
        for comp in &c.components {
            let residual = comp.lhs.substitute_unknowns(&bindings);
            let status = decide(&residual, tol, cfg);
            equations.push(EquationStatus {
                order: c.order,
                kind: c.kind.label().to_string(),
                index: comp.index.clone(),
                residual: tidy(&residual),
                status,
            });
        }
    }
    let mut noether_identity = Vec::new();
    for a in 0..=l.order() {
        let residual = noether_residual(l, &x, a)?;
        let status = decide(&residual, tol, cfg);
        noether_identity.push(EquationStatus {
            order: a,
            kind: "noether-identity".into(),
            index: Vec::new(),
            residual: tidy(&residual),
            status,
        });
    }
    let passed = !unrecoverable && equations.iter().chain(&noether_identity).all(|e| e.status.passed());
    let exact = x.orders.iter().skip(1).all(|o| o.is_zero_literal())
        && x.boundary.as_ref().is_some_and(|f| f.iter().skip(1).all(|e| e.is_zero_literal()));
    let classification = if exact {
        Classification::Exact
    } else {
        Classification::Approximate { order: l.order() }
    };
    let homothetic = if l.h_is_zero() {
        match homothetic_factors(l, &x) {
            Ok(h) => h,
            Err(e) => {
                notes.push(format!("homothetic factorisation skipped: {e}"));
                Vec::new()
            }
        }
    } else {
        Vec::new()
    };
    Ok(VerificationReport {
        name: x.name.clone(),
        passed,
        classification,
        boundary: x.boundary.clone().unwrap_or_default(),
        boundary_recovered,
        equations,
        noether_identity,
        homothetic_factors: homothetic,
        notes,
    })
}
