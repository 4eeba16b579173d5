use noether_core::conservation::{first_integral, symbolic_drift};
use noether_core::expr::{is_zero, parse, ZeroTestConfig};
use noether_core::noether::{homothetic_factors, verify};
use noether_core::solver::{instantiate, solve, span_contains};
use noether_core::{AnsatzSpec, HomotheticKind, ApproximateGenerator, Context, Expr, GeneratorOrder, Metric, ParamValue, PerturbedLagrangian};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn henon_heiles() -> PerturbedLagrangian {
    let ctx = Context::simple(&["x", "y"]);
    let v0 = parse("(x^2 + y^2)/2", &ctx).unwrap();
    let v1 = parse("x^2*y - y^3/3", &ctx).unwrap();
    PerturbedLagrangian::new(ctx, Metric::identity(2), Metric::zero(2), v0, v1, 1).unwrap()
}

fn order(l: &PerturbedLagrangian, xi: &str, eta: &[&str]) -> GeneratorOrder {
    let p = |s: &str| parse(s, l.ctx()).unwrap();
    GeneratorOrder { xi: p(xi), eta: eta.iter().map(|s| p(s)).collect() }
}

/// Symmetries of the unperturbed oscillator `(g, V0)`.
const EXACT: [(&str, [&str; 2]); 6] = [
    ("1", ["0", "0"]),
    ("0", ["y", "-x"]),
    ("0", ["sin(t)", "0"]),
    ("0", ["cos(t)", "0"]),
    ("0", ["0", "sin(t)"]),
    ("0", ["0", "cos(t)"]),
];

fn lifted(l: &PerturbedLagrangian, k: usize) -> ApproximateGenerator {
    let (xi, eta) = EXACT[k];
    ApproximateGenerator::new(format!("lift{k}"), vec![GeneratorOrder::zero(2), order(l, xi, &eta)], None)
}

fn verified_generators(l: &PerturbedLagrangian) -> Vec<ApproximateGenerator> {
    let mut out = vec![ApproximateGenerator::new("Z0", vec![order(l, "1", &["0", "0"]), GeneratorOrder::zero(2)], None)];
    out.extend((0..EXACT.len()).map(|k| lifted(l, k)));
    out
}

fn combine(l: &PerturbedLagrangian, gens: &[ApproximateGenerator], coeffs: &[(i64, i64)]) -> ApproximateGenerator {
    let n = l.dimension();
    let orders = (0..=l.order())
        .map(|a| {
            let c = |k: usize| Expr::frac(coeffs[k].0, coeffs[k].1);
            GeneratorOrder {
                xi: Expr::add_all(gens.iter().enumerate().map(|(k, g)| c(k) * &g.orders[a].xi)),
                eta: (0..n).map(|i| Expr::add_all(gens.iter().enumerate().map(|(k, g)| c(k) * &g.orders[a].eta[i]))).collect(),
            }
        })
        .collect();
    ApproximateGenerator::new("combo", orders, None)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn combinations_verify_and_integrals_are_linear(coeffs in prop::collection::vec((-3i64..=3, 1i64..=3), 7)) {
        let l = henon_heiles();
        let cfg = ZeroTestConfig::default();
        let gens = verified_generators(&l);
        let combo = combine(&l, &gens, &coeffs);
        let report = verify(&l, &combo, TOL, &cfg).unwrap();
        prop_assert!(report.passed);
        let i = first_integral(&l, &combo, 1, TOL, &cfg).unwrap();
        for a in 0..=1 {
            let mut expected = Vec::new();
            for (k, g) in gens.iter().enumerate() {
                let part = first_integral(&l, g, 1, TOL, &cfg).unwrap().parts[a].clone();
                expected.push(Expr::frac(coeffs[k].0, coeffs[k].1) * part);
            }
            let d = &i.parts[a] - Expr::add_all(expected);
            prop_assert!(is_zero(&d, TOL).is_zero(), "order {a}: {d}");
        }
    }

    #[test]
    fn lifted_exact_symmetries_are_first_order(k in 0usize..6) {
        let l = henon_heiles();
        let cfg = ZeroTestConfig::default();
        let x = lifted(&l, k);
        let report = verify(&l, &x, TOL, &cfg).unwrap();
        prop_assert!(report.passed);
        prop_assert!(report.equations.iter().filter(|e| e.kind == "xi-spatial-constancy").all(|e| e.status.passed()));
        // The recovered boundary terms verify when supplied explicitly.
        let explicit = x.clone().with_boundary(report.boundary.clone());
        prop_assert!(verify(&l, &explicit, TOL, &cfg).unwrap().passed);
        let i = first_integral(&l, &x, 1, TOL, &cfg).unwrap();
        prop_assert_eq!(i.epsilon_power, 1);
        prop_assert!(symbolic_drift(&l, &i).unwrap().truncation_vanishes(TOL, &cfg));
    }
}

fn case_two() -> PerturbedLagrangian {
    let one = || ParamValue::Rational(noether_core::rational::int(1));
    let ctx = Context::new(vec!["x"], "t", [("V0".to_string(), one()), ("V1".to_string(), one())].into()).unwrap();
    let v0 = parse("-V0/x^2", &ctx).unwrap();
    let v1 = parse("V1*x^2/(2*t^2)", &ctx).unwrap();
    PerturbedLagrangian::new(ctx, Metric::identity(1), Metric::zero(1), v0, v1, 1).unwrap()
}

fn basis(l: &PerturbedLagrangian, terms: &[&str]) -> AnsatzSpec {
    AnsatzSpec::new(terms.iter().map(|s| parse(s, l.ctx()).unwrap()).collect(), 1)
}

#[test]
fn solver_output_verifies_and_span_grows_with_the_basis() {
    let l = case_two();
    let cfg = ZeroTestConfig::default();
    let small = basis(&l, &["1", "t", "t^2", "ln(t)"]);
    let large = basis(&l, &["1", "t", "t^2", "t^(-1)", "t^(-2)", "ln(t)", "t*ln(t)", "t^2*ln(t)"]);
    let s = solve(&l, &small).unwrap();
    let big = solve(&l, &large).unwrap();
    assert!(big.generators.len() >= s.generators.len());
    let inst = instantiate(&l, &large).unwrap();
    for g in &s.generators {
        assert!(span_contains(&l, &inst, &big, g).unwrap(), "{}", g.name);
    }
    for g in s.generators.iter().chain(&big.generators) {
        assert!(verify(&l, g, TOL, &cfg).unwrap().passed, "{}", g.name);
        for f in homothetic_factors(&l, g).unwrap() {
            assert!(!matches!(f.kind, HomotheticKind::NotHomothetic { .. }), "{} order {}", g.name, f.order);
        }
    }
}
