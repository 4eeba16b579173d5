use num_traits::Zero;
use noether_core::expr::{is_zero, ZeroTest};
use noether_core::geometry::{check_homothetic, lie_derivative_metric, solve_homothetic, Tensor};
use noether_core::{Context, Expr, Metric, SpatialVectorField};
use proptest::prelude::*;

fn ctx() -> Context {
    Context::simple(&["x", "y"])
}

/// Polynomial fields of degree ≤ 2 in (x, y) with small integer coefficients.
fn field() -> impl Strategy<Value = SpatialVectorField> {
    prop::collection::vec(prop::collection::vec(-2i64..=2, 6), 2).prop_map(|cs| {
        let m = ["1", "x", "y", "x*y", "x^2", "y^2"];
        let c = ctx();
        let comps = cs
            .iter()
            .map(|row| Expr::add_all(row.iter().zip(m).map(|(k, s)| Expr::int(*k) * noether_core::expr::parse(s, &c).unwrap())))
            .collect();
        SpatialVectorField::new(comps, &c).unwrap()
    })
}

fn metric() -> impl Strategy<Value = Metric> {
    prop_oneof![
        Just(Metric::identity(2)),
        Just(Metric::new(vec![vec![Expr::one()], vec![Expr::zero(), Expr::sym("x").powi(2)]], &ctx()).unwrap()),
        Just(Metric::new(vec![vec![Expr::int(2)], vec![Expr::one(), Expr::int(3)]], &ctx()).unwrap()),
    ]
}

fn vanishes(t: &Tensor) -> bool {
    t.iter().flatten().all(|e| matches!(is_zero(e, 1e-9), ZeroTest::Zero))
}

fn sub(a: &Tensor, b: &Tensor) -> Tensor {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(u, v)| u - v).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lie_derivative_is_linear(g in metric(), y in field(), z in field(), a in -3i64..3) {
        let c = ctx();
        let comb = SpatialVectorField::new(
            y.components.iter().zip(&z.components).map(|(u, v)| Expr::int(a) * u + v).collect(),
            &c,
        ).unwrap();
        let lhs = lie_derivative_metric(&g, &comb, &c).unwrap();
        let ly = lie_derivative_metric(&g, &y, &c).unwrap();
        let lz = lie_derivative_metric(&g, &z, &c).unwrap();
        let rhs: Tensor = ly.iter().zip(&lz).map(|(r, s)| r.iter().zip(s).map(|(u, v)| Expr::int(a) * u + v).collect()).collect();
        prop_assert!(vanishes(&sub(&lhs, &rhs)));
    }

    #[test]
    fn commutator_identity(g in metric(), y in field(), z in field()) {
        let c = ctx();
        let lyz = lie_derivative_metric(&g, &y.bracket(&z, &c), &c).unwrap();
        let lz = lie_derivative_metric(&g, &z, &c).unwrap();
        let ly = lie_derivative_metric(&g, &y, &c).unwrap();
        let ly_lz = noether_core::geometry::lie_derivative_tensor(&lz, &y, &c).unwrap();
        let lz_ly = noether_core::geometry::lie_derivative_tensor(&ly, &z, &c).unwrap();
        prop_assert!(vanishes(&sub(&lyz, &sub(&ly_lz, &lz_ly))));
    }
}

#[test]
fn flat_homothetic_algebra_dimension() {
    for n in 1..=3usize {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let c = Context::new(names.iter().map(String::as_str).collect(), "t", Default::default()).unwrap();
        let g = Metric::identity(n);
        for degree in 1..=2 {
            let basis = solve_homothetic(&g, degree, &c).unwrap();
            assert_eq!(basis.len(), n * (n + 1) / 2 + 1, "n = {n}, degree = {degree}");
            for r in &basis {
                let again = check_homothetic(&g, &r.field, &c).unwrap();
                assert!(again.is_homothetic());
                assert_eq!(again.conformal_factor, r.conformal_factor);
            }
            let killing: Vec<_> = basis.iter().filter(|r| r.conformal_factor.is_zero()).collect();
            for a in &killing {
                for b in &killing {
                    let k = check_homothetic(&g, &a.field.bracket(&b.field, &c), &c).unwrap();
                    assert!(k.is_homothetic() && k.conformal_factor.is_zero());
                }
            }
        }
    }
}
