//! Shared inputs for the engine benchmarks.

use noether_core::expr::parse;
use noether_core::{ApproximateGenerator, Context, Expr, GeneratorOrder, Metric, PerturbedLagrangian};

/// Oscillator in the plane perturbed by the cubic Henon-Heiles potential.
pub fn henon_heiles() -> PerturbedLagrangian {
    let ctx = Context::simple(&["x", "y"]);
    let v0 = parse("(x^2 + y^2)/2", &ctx).unwrap();
    let v1 = parse("x^2*y - y^3/3", &ctx).unwrap();
    PerturbedLagrangian::new(ctx, Metric::identity(2), Metric::zero(2), v0, v1, 1).unwrap()
}

/// Rotation of the unperturbed oscillator lifted to first order.
pub fn lifted_rotation(l: &PerturbedLagrangian) -> ApproximateGenerator {
    let p = |s: &str| parse(s, l.ctx()).unwrap();
    let rotation = GeneratorOrder { xi: Expr::zero(), eta: vec![p("y"), p("-x")] };
    ApproximateGenerator::new("rotation", vec![GeneratorOrder::zero(2), rotation], None)
}

/// A dense expression with trigonometric and exponential factors.
pub fn expansion_input(ctx: &Context) -> Expr {
    parse("(x + y + t)^4*(sin(2*t) - cos(t))^2*exp(t/2) - (x*y - exp(t)*sin(t))^3", ctx).unwrap()
}
