//! The star product against oracles written from its definition: a brute-force
//! bidifferential sum on polynomials, and the closed form on exponentials.

use moyal_m3::expr::{rational_to_f64, Expr, Rational};
use moyal_m3::moyal::{star, MaxOrder, StarConfig};
use moyal_m3::orbit::{Lambda, SymplecticMatrix, CHART_VARS};
use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn bivector() -> impl Strategy<Value = SymplecticMatrix> {
    prop::array::uniform6(-3i64..=3).prop_map(|[a, b, c, d, e, f]| {
        SymplecticMatrix::from_ints([[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]]).unwrap()
    })
}

/// Polynomial of degree at most three in the chart variables.
fn polynomial() -> impl Strategy<Value = Expr> {
    let monomial = (prop::collection::vec(0usize..4, 0..=3), -3i64..=3, 1i64..=2)
        .prop_map(|(vs, n, d)| Expr::product(std::iter::once(Expr::ratio(n, d)).chain(vs.iter().map(|&v| Expr::var(CHART_VARS[v]))).collect()));
    prop::collection::vec(monomial, 1..5).prop_map(Expr::sum)
}

/// `Σ W^{i1 j1}⋯W^{ir jr} ∂_{i1⋯ir} f ∂_{j1⋯jr} g` over all index tuples.
fn bidifferential(f: &Expr, g: &Expr, w: &SymplecticMatrix, r: usize) -> Expr {
    let mut terms = Vec::new();
    for code in 0..16usize.pow(r as u32) {
        let mut coeff = Rational::one();
        let (mut df, mut dg) = (f.clone(), g.clone());
        let mut c = code;
        for _ in 0..r {
            let (i, j) = ((c % 16) / 4, c % 4);
            c /= 16;
            coeff *= w.get(i, j).clone();
            df = df.differentiate(CHART_VARS[i]);
            dg = dg.differentiate(CHART_VARS[j]);
        }
        if !coeff.is_zero() {
            terms.push(Expr::rational(coeff) * df * dg);
        }
    }
    Expr::sum(terms)
}

fn at(e: &Expr, p: &[f64; 4]) -> Complex64 {
    e.evaluator(&CHART_VARS).expect("chart variables").eval(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn corrections_match_bidifferential_sum(f in polynomial(), g in polynomial(), w in bivector()) {
        let p = star(&f, &g, &StarConfig::new(w.clone()));
        prop_assert!(p.exact);
        for (k, c) in p.corrections.iter().enumerate() {
            let oracle = bidifferential(&f, &g, &w, k + 1);
            prop_assert!((c.to_expr() - oracle).is_zero().is_zero, "order {}", k + 1);
        }
        // Past the last correction the oracle must vanish.
        prop_assert!(bidifferential(&f, &g, &w, p.order + 1).is_zero().is_zero);
    }

    #[test]
    fn exponentials_match_closed_form(
        a in prop::array::uniform4(-2i64..=2),
        b in prop::array::uniform4(-2i64..=2),
        w in bivector(),
        p in prop::array::uniform4(-1.0f64..1.0),
    ) {
        // e^{a·z} ⋆ e^{b·z} = e^{ν aᵀWb} e^{(a+b)·z}; compare the partial sums.
        let lin = |c: [i64; 4]| Expr::sum(c.iter().zip(CHART_VARS).map(|(&k, v)| Expr::int(k) * Expr::var(v)).collect());
        let (f, g) = (Expr::exp(lin(a)), Expr::exp(lin(b)));
        let order = 5;
        let cfg = StarConfig::new(w.clone()).with_max_order(MaxOrder::Fixed(order));
        let got = at(&star(&f, &g, &cfg).expr(), &p);

        let mut awb = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                awb += (a[i] * b[j]) as f64 * rational_to_f64(w.get(i, j));
            }
        }
        let x = cfg.nu().to_complex() * awb;
        let (mut sum, mut term) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        for r in 0..=order {
            sum += term;
            term *= x / (r + 1) as f64;
        }
        let dot: f64 = (0..4).map(|i| (a[i] + b[i]) as f64 * p[i]).sum();
        let want = sum * dot.exp();
        prop_assert!((got - want).norm() <= 1e-9 * (1.0 + want.norm()), "{got} vs {want}");
    }
}

#[test]
fn default_bivector_products_of_coordinates() {
    // With ν = −i/2, s1 ⋆ t2 − t2 ⋆ s1 = 2ν W^{s1 t2}.
    let lambda = Lambda::from_ratio(1, 1).unwrap();
    let w = moyal_m3::moyal::solve_bivector(&lambda, &moyal_m3::orbit::ChartConvention::polarized()).unwrap().matrix;
    let cfg = StarConfig::new(w.clone());
    let (s1, t2) = (Expr::var("s1"), Expr::var("t2"));
    let comm = star(&s1, &t2, &cfg).expr() - star(&t2, &s1, &cfg).expr();
    let want = Expr::product(vec![Expr::i(), Expr::int(-1), Expr::rational(w.get(0, 3).clone())]);
    assert!((comm - want).is_zero().is_zero);
}
