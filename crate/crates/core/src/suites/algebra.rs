use nalgebra::{Matrix4, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{anchors, Suite, SuiteConfig, SuiteError, SuiteOutput};
use crate::expr::Rational;
use crate::lie::{coadjoint, exp_algebra, AlgebraElement, DualFunctional, GroupElement};
use crate::report::{Section, PLUMBING};

/// Brackets against matrix commutators, Jacobi, and group-level plumbing.
pub struct AlgebraSuite;

fn commutator(a: &[[Rational; 4]; 4], b: &[[Rational; 4]; 4]) -> [[Rational; 4]; 4] {
    let mul = |x: &[[Rational; 4]; 4], y: &[[Rational; 4]; 4]| -> [[Rational; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| &x[i][k] * &y[k][j]).sum()))
    };
    let (ab, ba) = (mul(a, b), mul(b, a));
    std::array::from_fn(|i| std::array::from_fn(|j| &ab[i][j] - &ba[i][j]))
}

fn random_group(rng: &mut ChaCha8Rng) -> GroupElement {
    let pi = std::f64::consts::PI;
    let r = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    GroupElement::from_factors(r, rng.gen_range(-pi..pi), rng.gen_range(-pi / 2.0..pi / 2.0), rng.gen_range(-pi..pi))
}

impl Suite for AlgebraSuite {
    fn name(&self) -> &'static str {
        "verify-algebra"
    }

    fn description(&self) -> &'static str {
        "basis brackets against matrix commutators, Jacobi identity, group plumbing"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutput, SuiteError> {
        let tol = &cfg.tolerances;
        let basis = AlgebraElement::basis_all();
        let mut s = Section::default();

        let mut mismatched = Vec::new();
        let mut antisym = Vec::new();
        for u in &basis {
            for t in &basis {
                let oracle = AlgebraElement::from_matrix(&commutator(&u.to_matrix(), &t.to_matrix()));
                if oracle.as_ref() != Ok(&u.bracket(t)) {
                    mismatched.push(format!("[{u}, {t}]"));
                }
                if !u.bracket(t).add(&t.bracket(u)).is_zero() {
                    antisym.push(format!("[{u}, {t}]"));
                }
            }
        }
        let count = |v: &Vec<String>| v.len() as f64;
        s.check("basis brackets", anchors::LIE_BRACKET, count(&mismatched), "symbolic", tol, Some(json!({ "pairs": 36, "failing": mismatched })));
        s.check("antisymmetry", anchors::ANTISYMMETRY, count(&antisym), "symbolic", tol, Some(json!({ "failing": antisym })));

        let mut jacobi = Vec::new();
        for a in &basis {
            for b in &basis {
                for c in &basis {
                    let j = a.bracket(&b.bracket(c)).add(&b.bracket(&c.bracket(a))).add(&c.bracket(&a.bracket(b)));
                    if !j.is_zero() {
                        jacobi.push(format!("({a}, {b}, {c})"));
                    }
                }
            }
        }
        s.check("Jacobi on basis triples", anchors::JACOBI, count(&jacobi), "symbolic", tol, Some(json!({ "triples": 216, "failing": jacobi })));

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = cfg.random_instances;
        let (mut action, mut expo, mut euler) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..n {
            let (g, h) = (random_group(&mut rng), random_group(&mut rng));
            let f = DualFunctional::new(
                Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0)),
                Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0)),
            );
            let lhs = coadjoint(&g.mul(&h), &f);
            let rhs = coadjoint(&g, &coadjoint(&h, &f));
            action = action.max((lhs.mu_vec() - rhs.mu_vec()).norm().max((lhs.alpha_vec() - rhs.alpha_vec()).norm()));

            let (r, a, b, c) = g.to_factors();
            euler = euler.max(GroupElement::from_factors(r, a, b, c).distance(&g));

            let coeffs: [i64; 6] = std::array::from_fn(|_| rng.gen_range(-3..=3));
            let u = AlgebraElement::from_ints(coeffs);
            let m = u.to_matrix();
            let mf = Matrix4::from_fn(|i, j| crate::expr::rational_to_f64(&m[i][j]));
            expo = expo.max((exp_algebra(&u).to_homogeneous() - mf.exp()).abs().max());
        }
        s.check("coadjoint action composes", anchors::COADJOINT, action, "pointwise", tol, Some(json!({ "instances": n })));
        s.check("exponential against series", anchors::EXPONENTIAL, expo, "pointwise", tol, Some(json!({ "instances": n })));
        s.check("Euler factors round trip", PLUMBING, euler, "pointwise", tol, Some(json!({ "instances": n })));
        Ok(SuiteOutput { section: s, csv: None })
    }
}
