//! Property tests for the expression layer: derivative rules, finite
//! differences as an independent derivative oracle, and printing round trips.

use moyal_m3::expr::{parse, Expr};
use num_complex::Complex64;
use proptest::prelude::*;

const VARS: [&str; 4] = ["s1", "s2", "t1", "t2"];

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0usize..4).prop_map(|i| Expr::var(VARS[i])),
        (-4i64..=4, 1i64..=3).prop_map(|(n, d)| Expr::ratio(n, d)),
    ]
}

/// Expressions built from every node kind, shallow enough that values stay
/// moderate on the unit box.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::product),
            (inner.clone(), 1i32..=3).prop_map(|(e, n)| Expr::pow(e, n)),
            inner.clone().prop_map(|e| Expr::exp(e * Expr::ratio(1, 4))),
            inner.clone().prop_map(Expr::sin),
            inner.prop_map(Expr::cos),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.0f64..1.0)
}

fn at(e: &Expr, p: &[f64; 4]) -> Complex64 {
    e.evaluator(&VARS).expect("chart variables only").eval(p)
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_is_linear(f in expr(), g in expr(), a in -3i64..=3, b in -3i64..=3, v in 0usize..4) {
        let x = VARS[v];
        let lhs = (Expr::int(a) * f.clone() + Expr::int(b) * g.clone()).differentiate(x);
        let rhs = Expr::int(a) * f.differentiate(x) + Expr::int(b) * g.differentiate(x);
        prop_assert!((lhs - rhs).is_zero().is_zero);
    }

    #[test]
    fn leibniz_rule(f in expr(), g in expr(), v in 0usize..4) {
        let x = VARS[v];
        let lhs = (f.clone() * g.clone()).differentiate(x);
        let rhs = f.differentiate(x) * g.clone() + f * g.differentiate(x);
        prop_assert!((lhs - rhs).is_zero().is_zero);
    }

    #[test]
    fn mixed_partials_commute(f in expr(), a in 0usize..4, b in 0usize..4) {
        let ab = f.differentiate(VARS[a]).differentiate(VARS[b]);
        let ba = f.differentiate(VARS[b]).differentiate(VARS[a]);
        prop_assert!((ab - ba).is_zero().is_zero);
    }

    #[test]
    fn derivative_matches_central_difference(f in expr(), v in 0usize..4, p in point()) {
        let h = 1e-4;
        let (mut up, mut down) = (p, p);
        up[v] += h;
        down[v] -= h;
        let fd = (at(&f, &up) - at(&f, &down)) / (2.0 * h);
        let exact = at(&f.differentiate(VARS[v]), &p);
        prop_assert!(close(exact, fd, 1e-5), "{f}: {exact} vs {fd}");
    }

    #[test]
    fn printing_round_trips(f in expr(), p in point()) {
        let text = f.to_string();
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(close(at(&f, &p), at(&back, &p), 1e-12), "{text}");
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn normal_form_preserves_values(f in expr(), p in point()) {
        prop_assert!(close(at(&f, &p), at(&f.normal_form().to_expr(), &p), 1e-10));
    }
}
