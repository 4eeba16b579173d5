//! Equations of motion, fixed-step RK4 trajectories and drift measurements.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::conservation::{forces, FirstIntegral};
use crate::context::{Context, EPSILON};
use crate::error::{Error, Result};
use crate::expr::{clear_denominators, evaluate, CompiledExpr, Expr, Point};
use crate::geometry::solve_dense;
use crate::noether::PerturbedLagrangian;

/// Drifts at or below this fraction of `max(1, max|I|)` count as integrator noise.
pub const NOISE_FLOOR: f64 = 1e-10;

fn tidy(e: Expr) -> Expr {
    clear_denominators(&e).map(|c| c.to_expr()).unwrap_or(e)
}

/// `M ẍ = R` for `L0 + ε L1`, with ε kept as the symbol `eps`.
#[derive(Debug, Clone)]
pub struct EquationsOfMotion {
    ctx: Context,
    pub mass: Vec<Vec<Expr>>,
    pub force: Vec<Expr>,
    /// Closed-form accelerations when `M` is diagonal.
    pub accelerations: Option<Vec<Expr>>,
}

impl EquationsOfMotion {
    pub fn ctx(&self) -> &Context {
        &self.ctx
    }
}

pub fn euler_lagrange(l: &PerturbedLagrangian) -> EquationsOfMotion {
    let n = l.dimension();
    let eps = Expr::sym(EPSILON);
    let mass: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| tidy(l.g().get(i, j) + &eps * l.h().get(i, j))).collect())
        .collect();
    let (r0, r1) = forces(l);
    let force: Vec<Expr> = r0.iter().zip(&r1).map(|(a, b)| tidy(a + &eps * b)).collect();
    let diagonal = l.g().is_diagonal() && l.h().is_diagonal();
    let accelerations = diagonal.then(|| (0..n).map(|i| tidy(&force[i] / &mass[i][i])).collect());
    EquationsOfMotion {
        ctx: l.ctx().clone(),
        mass,
        force,
        accelerations,
    }
}

/// Slot order shared by every compiled expression: t, coordinates, velocities, ε, parameters.
fn slots(ctx: &Context) -> Vec<String> {
    let mut s = vec![ctx.time().to_string()];
    s.extend(ctx.coordinates().iter().cloned());
    s.extend(ctx.velocities().iter().cloned());
    s.push(EPSILON.to_string());
    s.extend(ctx.parameters().keys().cloned());
    s
}

fn parameter_values(ctx: &Context) -> Result<Vec<f64>> {
    let v = ctx.numeric_values()?;
    Ok(ctx.parameters().keys().map(|k| v[k]).collect())
}

enum Rhs {
    Closed(Vec<CompiledExpr>),
    Linear { mass: Vec<Vec<CompiledExpr>>, force: Vec<CompiledExpr> },
}

struct Field {
    rhs: Rhs,
    n: usize,
    buf: Vec<f64>,
}

impl Field {
    fn new(eom: &EquationsOfMotion, eps: f64) -> Result<Field> {
        let ctx = &eom.ctx;
        let s = slots(ctx);
        let compile = |e: &Expr| CompiledExpr::compile(e, &s);
        let rhs = match &eom.accelerations {
            Some(a) => Rhs::Closed(a.iter().map(compile).collect::<Result<_>>()?),
            None => Rhs::Linear {
                mass: eom.mass.iter().map(|r| r.iter().map(compile).collect()).collect::<Result<_>>()?,
                force: eom.force.iter().map(compile).collect::<Result<_>>()?,
            },
        };
        let n = ctx.dimension();
        let mut buf = vec![0.0; 2 * n + 2];
        buf[2 * n + 1] = eps;
        buf.extend(parameter_values(ctx)?);
        Ok(Field { rhs, n, buf })
    }

    fn eval(&mut self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n;
        self.buf[0] = t;
        self.buf[1..=2 * n].copy_from_slice(y);
        out[..n].copy_from_slice(&y[n..]);
        let abort = |reason: String| Error::IntegrationAborted { t, reason, state: y.to_vec() };
        match &self.rhs {
            Rhs::Closed(a) => {
                for (i, c) in a.iter().enumerate() {
                    out[n + i] = c.eval(&self.buf).map_err(|e| abort(e.to_string()))?;
                }
            }
            Rhs::Linear { mass, force } => {
                let m: Vec<Vec<f64>> = mass
                    .iter()
                    .map(|r| r.iter().map(|c| c.eval(&self.buf)).collect::<Result<_>>())
                    .collect::<Result<_>>()
                    .map_err(|e| abort(e.to_string()))?;
                let r: Vec<f64> = force.iter().map(|c| c.eval(&self.buf)).collect::<Result<_>>().map_err(|e| abort(e.to_string()))?;
                let a = solve_dense(&m, &r).ok_or_else(|| abort("singular mass matrix".into()))?;
                out[n..].copy_from_slice(&a);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `(x^1..x^n, ẋ^1..ẋ^n)` per sample.
    pub states: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub step: f64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSetup {
    pub initial: Vec<f64>,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
}

/// Classical RK4 with a fixed step from `t_start` to `t_end`.
pub fn integrate(eom: &EquationsOfMotion, setup: &SimulationSetup, eps: f64) -> Result<Trajectory> {
    let n = eom.ctx.dimension();
    let SimulationSetup { initial, t_start, t_end, dt } = setup;
    let (t_start, t_end, dt) = (*t_start, *t_end, *dt);
    if initial.len() != 2 * n {
        return Err(Error::DimensionMismatch(format!("initial state has {} entries, expected {}", initial.len(), 2 * n)));
    }
    if !(dt > 0.0 && dt.is_finite()) || t_end <= t_start || !t_start.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidInput("integration needs dt > 0 and t_end > t_start".into()));
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("initial state is not finite".into()));
    }
    let steps = ((t_end - t_start) / dt).round().max(1.0) as usize;
    let mut field = Field::new(eom, eps)?;
    let m = 2 * n;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = initial.clone();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    times.push(t_start);
    states.push(y.clone());
    for s in 0..steps {
        let t = t_start + s as f64 * dt;
        field.eval(t, &y, &mut k1)?;
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        field.eval(t + 0.5 * dt, &tmp, &mut k2)?;
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        field.eval(t + 0.5 * dt, &tmp, &mut k3)?;
        for i in 0..m {
            tmp[i] = y[i] + dt * k3[i];
        }
        field.eval(t + dt, &tmp, &mut k4)?;
        for i in 0..m {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = t_start + (s + 1) as f64 * dt;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationAborted {
                t: t_next,
                reason: "non-finite state".into(),
                state: y,
            });
        }
        times.push(t_next);
        states.push(y.clone());
    }
    Ok(Trajectory {
        times,
        states,
        epsilon: eps,
        step: dt,
        method: "rk4".into(),
    })
}

/// Values of the integral (ε folded in) at every sample.
pub fn integral_series(ctx: &Context, integral: &FirstIntegral, traj: &Trajectory) -> Result<Vec<f64>> {
    let s = slots(ctx);
    let full = integral.full();
    let unbound: Vec<String> = full.symbols().into_iter().filter(|x| !s.contains(x) && !ctx.resolves(x)).collect();
    if !unbound.is_empty() {
        return Err(Error::Unbound(format!("integral `{}` uses {}", integral.name, unbound.join(", "))));
    }
    let c = CompiledExpr::compile(&full, &s)?;
    let n = ctx.dimension();
    let mut buf = vec![0.0; 2 * n + 2];
    buf[2 * n + 1] = traj.epsilon;
    buf.extend(parameter_values(ctx)?);
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, y)| {
            buf[0] = *t;
            buf[1..=2 * n].copy_from_slice(y);
            c.eval(&buf).map_err(|e| Error::IntegrationAborted {
                t: *t,
                reason: format!("evaluating `{}`: {e}", integral.name),
                state: y.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftRecord {
    pub integral: String,
    pub epsilon: f64,
    pub max_abs_drift: f64,
    pub final_drift: f64,
    pub initial_value: f64,
    /// `max_t |I(t)|`, the scale used for the noise floor.
    pub scale: f64,
    pub t_span: (f64, f64),
}

impl DriftRecord {
    pub fn at_noise_floor(&self) -> bool {
        self.max_abs_drift <= NOISE_FLOOR * self.scale.max(1.0)
    }
}

pub fn drift_from_series(name: &str, traj: &Trajectory, values: &[f64]) -> DriftRecord {
    let i0 = values[0];
    let max_abs_drift = values.iter().map(|v| (v - i0).abs()).fold(0.0, f64::max);
    DriftRecord {
        integral: name.to_string(),
        epsilon: traj.epsilon,
        max_abs_drift,
        final_drift: values[values.len() - 1] - i0,
        initial_value: i0,
        scale: values.iter().map(|v| v.abs()).fold(0.0, f64::max),
        t_span: (traj.times[0], traj.times[traj.times.len() - 1]),
    }
}

pub fn drift(ctx: &Context, integral: &FirstIntegral, traj: &Trajectory) -> Result<DriftRecord> {
    let values = integral_series(ctx, integral, traj)?;
    Ok(drift_from_series(&integral.name, traj, &values))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub integral: String,
    pub records: Vec<DriftRecord>,
    /// Least-squares slope of `log max_abs_drift` against `log ε`; absent when
    /// fewer than two ε values survive the noise-floor filter.
    pub slope: Option<f64>,
    pub expected: f64,
    /// Slope more than 0.3 away from `order + 1`.
    pub flagged: bool,
    pub notes: Vec<String>,
}

/// Drift of every integral for every ε; trajectories run in parallel over ε.
/// `out[k][j]` belongs to `epsilons[k]` and `integrals[j]`.
pub fn drift_table(eom: &EquationsOfMotion, integrals: &[FirstIntegral], epsilons: &[f64], setup: &SimulationSetup) -> Result<Vec<Vec<DriftRecord>>> {
    epsilons
        .par_iter()
        .map(|&e| {
            let traj = integrate(eom, setup, e)?;
            integrals.iter().map(|i| drift(&eom.ctx, i, &traj)).collect()
        })
        .collect()
}

/// Fits the scaling exponent from drift records of one integral.
pub fn scaling_from_records(integral: &FirstIntegral, records: Vec<DriftRecord>) -> ScalingReport {
    let mut notes = Vec::new();
    let kept: Vec<&DriftRecord> = records
        .iter()
        .filter(|r| {
            let floor = r.at_noise_floor();
            if floor {
                notes.push(format!("eps = {}: drift {:.3e} at integrator noise floor, excluded", r.epsilon, r.max_abs_drift));
            }
            !floor
        })
        .collect();
    let slope = (kept.len() >= 2).then(|| {
        let xs: Vec<f64> = kept.iter().map(|r| r.epsilon.ln()).collect();
        let ys: Vec<f64> = kept.iter().map(|r| r.max_abs_drift.ln()).collect();
        let k = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    });
    if slope.is_none() {
        notes.push("slope indeterminate: fewer than two drifts above the noise floor".into());
    }
    let expected = integral.order as f64 + 1.0;
    let flagged = slope.is_some_and(|s| (s - expected).abs() > 0.3);
    if flagged {
        notes.push(format!("measured slope {:.3} differs from the expected {expected}", slope.unwrap_or(f64::NAN)));
    }
    ScalingReport {
        integral: integral.name.clone(),
        records,
        slope,
        expected,
        flagged,
        notes,
    }
}

pub fn scaling_exponent(eom: &EquationsOfMotion, integral: &FirstIntegral, epsilons: &[f64], setup: &SimulationSetup) -> Result<ScalingReport> {
    if epsilons.len() < 2 {
        return Err(Error::InvalidInput("scaling needs at least two ε values".into()));
    }
    if epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidInput("ε values must be positive".into()));
    }
    let table = drift_table(eom, std::slice::from_ref(integral), epsilons, setup)?;
    Ok(scaling_from_records(integral, table.into_iter().flatten().collect()))
}

/// Fifty periods of the slowest unperturbed mode read off `V0`'s Hessian at the
/// origin, or 50 when `V0` has no confining quadratic part there.
pub fn default_t_span(l: &PerturbedLagrangian) -> f64 {
    let ctx = l.ctx();
    let Ok(mut point) = ctx.numeric_values().map(|v| v.into_iter().collect::<Point>()) else {
        return 50.0;
    };
    point.insert(ctx.time().to_string(), 0.0);
    for x in ctx.coordinates() {
        point.insert(x.clone(), 0.0);
    }
    let mut slowest: Option<f64> = None;
    for (i, x) in ctx.coordinates().iter().enumerate() {
        let k = evaluate(&l.v0().diff(x).diff(x), &point);
        let m = evaluate(l.g().get(i, i), &point);
        match (k, m) {
            (Ok(k), Ok(m)) if k > 0.0 && m > 0.0 && k.is_finite() && m.is_finite() => {
                let w = (k / m).sqrt();
                slowest = Some(slowest.map_or(w, |s: f64| s.min(w)));
            }
            _ => return 50.0,
        }
    }
    slowest.map_or(50.0, |w| 50.0 * std::f64::consts::TAU / w)
}

/// One row per sample, `t,x1..xn,v1..vn[,I_name..]`, 17 significant digits.
pub fn write_csv<W: Write>(mut w: W, traj: &Trajectory, integrals: &[(String, Vec<f64>)]) -> std::io::Result<()> {
    let n = traj.states.first().map_or(0, |s| s.len() / 2);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("v{i}")));
    header.extend(integrals.iter().map(|(name, _)| format!("I_{name}")));
    writeln!(w, "{}", header.join(","))?;
    for (k, (t, y)) in traj.times.iter().zip(&traj.states).enumerate() {
        // Adding 0.0 turns -0.0 into 0.0.
        let mut row = vec![format!("{:.16e}", t + 0.0)];
        row.extend(y.iter().map(|v| format!("{:.16e}", v + 0.0)));
        row.extend(integrals.iter().map(|(_, vals)| format!("{:.16e}", vals[k] + 0.0)));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::ParamValue;
    use crate::conservation::{hamiltonian, Part};
    use crate::expr::{is_zero, parse};
    use crate::geometry::Metric;

    fn lagrangian(coords: &[&str], params: &[(&str, ParamValue)], v0: &str, v1: &str) -> PerturbedLagrangian {
        let p = params.iter().map(|(s, v)| (s.to_string(), v.clone())).collect();
        let ctx = Context::new(coords.to_vec(), "t", p).unwrap();
        let n = coords.len();
        let v0 = parse(v0, &ctx).unwrap();
        let v1 = parse(v1, &ctx).unwrap();
        PerturbedLagrangian::new(ctx, Metric::identity(n), Metric::zero(n), v0, v1, 1).unwrap()
    }

    fn oscillator() -> PerturbedLagrangian {
        lagrangian(&["x"], &[], "x^2/2", "0")
    }

    fn setup(initial: &[f64], t_end: f64, dt: f64) -> SimulationSetup {
        SimulationSetup {
            initial: initial.to_vec(),
            t_start: 0.0,
            t_end,
            dt,
        }
    }

    #[test]
    fn equations_of_motion() {
        let l = lagrangian(&["x"], &[("w", ParamValue::Symbolic)], "x^2/2", "-exp(w*t)*x^2/2");
        let a = euler_lagrange(&l).accelerations.unwrap();
        let e = parse("-x + eps*exp(w*t)*x", l.ctx()).unwrap();
        assert!(is_zero(&(&a[0] - &e), 1e-10).is_zero());
        let l = lagrangian(&["x", "y"], &[], "(x^2 + y^2)/2", "x^2*y - y^3/3");
        let a = euler_lagrange(&l).accelerations.unwrap();
        for (got, want) in a.iter().zip(["-x - 2*eps*x*y", "-y - eps*(x^2 - y^2)"]) {
            assert!(is_zero(&(got - &parse(want, l.ctx()).unwrap()), 1e-10).is_zero(), "{got}");
        }
        let l = lagrangian(&["x"], &[], "0", "0");
        assert!(euler_lagrange(&l).accelerations.unwrap()[0].is_zero_literal());
    }

    #[test]
    fn oscillator_period() {
        let eom = euler_lagrange(&oscillator());
        let tau = std::f64::consts::TAU;
        let traj = integrate(&eom, &setup(&[1.0, 0.0], tau, tau / 6283.0), 0.0).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last[0] - 1.0).abs() < 1e-9 && last[1].abs() < 1e-9, "{last:?}");
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn energy_drift_over_a_hundred_periods() {
        let l = oscillator();
        let eom = euler_lagrange(&l);
        let traj = integrate(&eom, &setup(&[1.0, 0.0], 100.0 * std::f64::consts::TAU, 1e-3), 0.0).unwrap();
        let h = FirstIntegral::from_parts("H0", vec![hamiltonian(&l, Part::Zeroth)]);
        let d = drift(l.ctx(), &h, &traj).unwrap();
        assert!(d.max_abs_drift < 1e-10, "{}", d.max_abs_drift);
    }

    #[test]
    fn time_reversal() {
        let eom = euler_lagrange(&oscillator());
        let fwd = integrate(&eom, &setup(&[1.0, 0.3], 20.0, 1e-3), 0.0).unwrap();
        let end = fwd.states.last().unwrap();
        let back = integrate(&eom, &setup(&[end[0], -end[1]], 20.0, 1e-3), 0.0).unwrap();
        let b = back.states.last().unwrap();
        assert!((b[0] - 1.0).abs() < 1e-8 && (b[1] + 0.3).abs() < 1e-8, "{b:?}");
    }

    #[test]
    fn constant_integral_has_no_drift() {
        let l = oscillator();
        let traj = integrate(&euler_lagrange(&l), &setup(&[1.0, 0.0], 1.0, 0.01), 0.0).unwrap();
        let c = FirstIntegral::from_parts("c", vec![Expr::int(3)]);
        assert_eq!(drift(l.ctx(), &c, &traj).unwrap().max_abs_drift, 0.0);
    }

    #[test]
    fn aborts_on_blow_up_and_singular_mass() {
        let l = lagrangian(&["x"], &[], "-x^4", "0");
        let err = integrate(&euler_lagrange(&l), &setup(&[1.0, 1.0], 10.0, 0.01), 0.0).unwrap_err();
        assert!(matches!(err, Error::IntegrationAborted { .. }), "{err}");
        let ctx = Context::simple(&["x", "y"]);
        let g = Metric::new(vec![vec![Expr::one()], vec![Expr::sym("x"), Expr::one()]], &ctx).unwrap();
        let l = PerturbedLagrangian::new(ctx, g, Metric::zero(2), Expr::zero(), Expr::zero(), 1).unwrap();
        let eom = euler_lagrange(&l);
        assert!(eom.accelerations.is_none());
        let err = integrate(&eom, &setup(&[1.0, 0.0, 0.0, 0.0], 1.0, 0.01), 0.0).unwrap_err();
        assert!(matches!(err, Error::IntegrationAborted { ref reason, .. } if reason.contains("singular")), "{err}");
    }

    #[test]
    fn rejects_bad_setup() {
        let eom = euler_lagrange(&oscillator());
        assert!(integrate(&eom, &setup(&[1.0, 0.0], 1.0, -0.1), 0.0).is_err());
        assert!(integrate(&eom, &setup(&[1.0, 0.0], 0.0, 0.1), 0.0).is_err());
        assert!(integrate(&eom, &setup(&[1.0], 1.0, 0.1), 0.0).is_err());
    }

    #[test]
    fn case_two_runs_from_one() {
        let params = [("V0", ParamValue::Rational(crate::rational::int(1))), ("V1", ParamValue::Rational(crate::rational::int(1)))];
        let l = lagrangian(&["x"], &params, "-V0/x^2", "V1*x^2/(2*t^2)");
        let s = SimulationSetup {
            initial: vec![1.0, 1.0],
            t_start: 1.0,
            t_end: 5.0,
            dt: 1e-3,
        };
        assert!(integrate(&euler_lagrange(&l), &s, 0.01).is_ok());
    }

    #[test]
    fn exact_integral_scaling_is_indeterminate() {
        let l = oscillator();
        let h = FirstIntegral::from_parts("H0", vec![hamiltonian(&l, Part::Zeroth)]);
        let r = scaling_exponent(&euler_lagrange(&l), &h, &[1e-2, 5e-3], &setup(&[1.0, 0.0], 10.0, 1e-3)).unwrap();
        assert!(r.slope.is_none());
        assert_eq!(r.notes.len(), 3);
    }

    #[test]
    fn default_span() {
        assert!((default_t_span(&oscillator()) - 100.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(default_t_span(&lagrangian(&["x"], &[], "0", "0")), 50.0);
    }

    #[test]
    fn csv_layout() {
        let l = oscillator();
        let traj = integrate(&euler_lagrange(&l), &setup(&[1.0, 0.0], 0.2, 0.1), 0.0).unwrap();
        let mut out = Vec::new();
        write_csv(&mut out, &traj, &[("H0".into(), vec![0.5; 3])]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,v1,I_H0");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1");
    }
}
