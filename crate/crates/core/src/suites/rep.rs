use std::fmt::Write;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{anchors, Suite, SuiteConfig, SuiteError, SuiteOutput};
use crate::expr::Expr;
use crate::lie::{AlgebraElement, GroupElement};
use crate::orbit::Lambda;
use crate::repn::{
    cauchy_check, factored_vs_reference, generator_bracket_check, homomorphism_check, infinitesimal_check,
    unitarity_check, unitary, QuadratureGrid, SphereFunction, SPHERE_VARS,
};
use crate::report::{exact_residual, Section, PLUMBING};

/// Unitaries on the sphere: factored against induced, homomorphism,
/// unitarity, and generators.
pub struct RepSuite;

/// Step of the central difference in the infinitesimal check.
pub const INFINITESIMAL_STEP: f64 = 1e-4;

/// Default node counts for pointwise comparisons.
const POINTWISE_GRID: (usize, usize) = (8, 16);

fn random_factors(rng: &mut ChaCha8Rng) -> (Vector3<f64>, [f64; 3]) {
    let pi = std::f64::consts::PI;
    let r = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    (r, [rng.gen_range(-pi..pi), rng.gen_range(-pi / 2.0..pi / 2.0), rng.gen_range(-pi..pi)])
}

fn group(f: &(Vector3<f64>, [f64; 3])) -> GroupElement {
    GroupElement::from_factors(f.0, f.1[0], f.1[1], f.1[2])
}

/// `exp(−(σ1 − λ)²/λ²) σ2/λ` and `exp(−σ3²/λ²)`.
fn gaussian_pair(lambda: &Lambda) -> (SphereFunction, SphereFunction) {
    let l = lambda.expr();
    let inv2 = Expr::pow(l.clone(), -2);
    let s = |k: usize| Expr::var(SPHERE_VARS[k]);
    let d = s(0) - l.clone();
    let f = Expr::exp(-(d.clone() * d) * inv2.clone()) * s(1) * Expr::pow(l, -1);
    let h = Expr::exp(-(s(2) * s(2)) * inv2);
    (SphereFunction::symbolic(f), SphereFunction::symbolic(h))
}

fn test_set() -> Vec<SphereFunction> {
    SphereFunction::test_set().into_iter().map(|(_, f)| f).collect()
}

impl RepSuite {
    fn pointwise_grid(cfg: &SuiteConfig, lambda: &Lambda) -> Result<QuadratureGrid, SuiteError> {
        let (a, b) = cfg.sphere_grid.unwrap_or(POINTWISE_GRID);
        QuadratureGrid::new(a, b, lambda.to_f64()).map_err(|e| SuiteError::Precondition(e.to_string()))
    }

    fn unitarity_grid(cfg: &SuiteConfig, lambda: &Lambda, r_norm: f64) -> Result<QuadratureGrid, SuiteError> {
        let l = lambda.to_f64();
        let (a, b) = cfg.sphere_grid.unwrap_or_else(|| QuadratureGrid::heuristic_counts(l, r_norm));
        QuadratureGrid::new(a, b, l).map_err(|e| SuiteError::Precondition(e.to_string()))
    }

    fn group_checks(cfg: &SuiteConfig, lambda: &Lambda, rng: &mut ChaCha8Rng, s: &mut Section) -> Result<(), SuiteError> {
        let tol = &cfg.tolerances;
        let grid = Self::pointwise_grid(cfg, lambda)?;
        let tests = test_set();
        let n = cfg.random_instances;

        let singles: Vec<_> = (0..n).map(|_| random_factors(rng)).collect();
        let fr = singles
            .par_iter()
            .map(|(r, th)| factored_vs_reference(r, *th, lambda, &tests, &grid))
            .reduce(|| 0.0, f64::max);
        s.check(format!("factored against induced (lambda={lambda})"), anchors::FACTORED_UNITARY, fr, "pointwise", tol, Some(json!({ "instances": n, "nodes": grid.nodes.len() })));

        let pairs: Vec<_> = (0..n).map(|_| (random_factors(rng), random_factors(rng))).collect();
        let hom: Vec<_> =
            pairs.par_iter().map(|(a, b)| homomorphism_check(&group(a), &group(b), lambda, &tests, &grid)).collect();
        let fac = hom.iter().map(|h| h.factored).fold(0.0, f64::max);
        let rf = hom.iter().map(|h| h.reference).fold(0.0, f64::max);
        s.check(format!("homomorphism (lambda={lambda})"), anchors::HOMOMORPHISM, fac, "pointwise", tol, Some(json!({ "instances": n, "reference_route": rf })));

        let inv = singles
            .par_iter()
            .map(|f| {
                let g = group(f);
                homomorphism_check(&g, &g.inverse(), lambda, &tests, &grid).factored
            })
            .reduce(|| 0.0, f64::max);
        s.check(format!("inverse composes to identity (lambda={lambda})"), anchors::HOMOMORPHISM, inv, "pointwise", tol, None);
        let tr = pairs
            .par_iter()
            .map(|(a, b)| {
                let (g, h) = (GroupElement::translation_only(a.0), GroupElement::translation_only(b.0));
                homomorphism_check(&g, &h, lambda, &tests, &grid).factored
            })
            .reduce(|| 0.0, f64::max);
        s.check(format!("translations compose (lambda={lambda})"), anchors::HOMOMORPHISM, tr, "pointwise", tol, None);
        Ok(())
    }

    fn unitarity_checks(cfg: &SuiteConfig, lambda: &Lambda, rng: &mut ChaCha8Rng, s: &mut Section) -> Result<(), SuiteError> {
        let tol = &cfg.tolerances;
        let l = lambda.to_f64();
        let area = 4.0 * std::f64::consts::PI * l * l;
        let weights = Self::unitarity_grid(cfg, lambda, 1.0)?.total_weight();
        s.check(format!("quadrature weights (lambda={lambda})"), PLUMBING, (weights - area).abs(), "pointwise", tol, None);

        let poly = (SphereFunction::parse("sigma1*sigma2 + sigma3").expect("literal"), SphereFunction::parse("sigma1^2 - 2*sigma2").expect("literal"));
        let gauss = gaussian_pair(lambda);
        let rotation = group(&(Vector3::zeros(), random_factors(rng).1));
        let translation = GroupElement::translation_only(Vector3::new(0.6, 0.0, 0.8));
        let general = {
            let (r, th) = random_factors(rng);
            let r = if r.norm() > 1.0 { r / r.norm() } else { r };
            group(&(r, th))
        };
        let cases = [
            ("identity", GroupElement::identity(), &poly),
            ("rotation", rotation, &poly),
            ("translation", translation, &gauss),
            ("general", general, &gauss),
        ];
        let mut detail = serde_json::Map::new();
        let (mut worst, mut all_converged) = (0.0f64, true);
        for (name, g, (f, h)) in cases {
            let grid = Self::unitarity_grid(cfg, lambda, g.translation.norm())?;
            let r = unitarity_check(&g, lambda, f, h, &grid).map_err(|e| SuiteError::Precondition(e.to_string()))?;
            worst = worst.max(r.deviation);
            all_converged &= r.converged;
            detail.insert(name.into(), json!(r));
        }
        s.check(format!("unitarity (lambda={lambda})"), anchors::UNITARITY, worst, "quadrature", tol, Some(detail.into()));
        s.check(format!("quadrature refinement converged (lambda={lambda})"), PLUMBING, if all_converged { 0.0 } else { 1.0 }, "symbolic", tol, None);
        Ok(())
    }

    fn generator_checks(cfg: &SuiteConfig, lambda: &Lambda, s: &mut Section) -> Result<(), SuiteError> {
        let tol = &cfg.tolerances;
        let grid = Self::pointwise_grid(cfg, lambda)?;
        let tests = test_set();
        let basis = AlgebraElement::basis_all();
        let pairs: Vec<_> = basis.iter().flat_map(|u| basis.iter().map(move |t| (u, t))).collect();
        let results: Vec<_> =
            pairs.par_iter().map(|(u, t)| generator_bracket_check(u, t, lambda, &tests, &grid, &cfg.zero)).collect();
        let symbolic = results.iter().filter(|r| !r.symbolic_zero).count();
        let pointwise = results.iter().map(|r| r.pointwise).fold(0.0, f64::max);
        s.check(format!("generator brackets, symbolic (lambda={lambda})"), anchors::GENERATOR_BRACKETS, symbolic as f64, "symbolic", tol, Some(json!({ "pairs": 36 })));
        s.check(format!("generator brackets, finite-difference flows (lambda={lambda})"), anchors::GENERATOR_BRACKETS, pointwise, "flow-bracket", tol, Some(json!({ "pairs": 36 })));

        let directions = [AlgebraElement::from_ints([1, 0, 0, 1, 0, 0]), AlgebraElement::from_ints([0, 1, 0, 0, 0, 1])];
        let grid = &grid;
        let tests = &tests;
        let cauchy = directions
            .par_iter()
            .flat_map(|u| tests.par_iter().map(move |f| cauchy_check(u, lambda, f, grid)))
            .reduce(|| 0.0, f64::max);
        s.check(format!("evolution equation (lambda={lambda})"), anchors::CAUCHY, cauchy, "finite-difference", tol, Some(json!({ "directions": ["X1 + E1", "X2 + E3"] })));
        Ok(())
    }

    fn infinitesimal_checks(cfg: &SuiteConfig, lambda: &Lambda, s: &mut Section) -> Result<(), SuiteError> {
        let tol = &cfg.tolerances;
        let grid = Self::pointwise_grid(cfg, lambda)?;
        let tests = test_set();
        let mut dirs: Vec<AlgebraElement> = AlgebraElement::basis_all().to_vec();
        dirs.push(AlgebraElement::from_ints([1, 0, 0, 1, 0, 0]));
        let mut detail = serde_json::Map::new();
        let (mut worst, mut alt) = (0.0f64, f64::INFINITY);
        for u in &dirs {
            let rs: Vec<_> =
                tests.par_iter().map(|f| infinitesimal_check(u, lambda, f, &grid, INFINITESIMAL_STEP)).collect();
            let r = rs.iter().map(|r| r.residual).fold(0.0, f64::max);
            let a = rs.iter().map(|r| r.alternative_residual).fold(0.0, f64::max);
            worst = worst.max(r);
            if !u.rotation_axis().iter().all(num_traits::Zero::is_zero) {
                alt = alt.min(a);
            }
            detail.insert(u.to_string(), json!({ "residual": r, "alternative_residual": a }));
        }
        let l = lambda.to_f64();
        s.check(
            format!("generator as derivative (lambda={lambda})"),
            anchors::INFINITESIMAL,
            worst,
            "finite-difference",
            tol,
            Some(json!({ "step": INFINITESIMAL_STEP, "predicted_truncation": INFINITESIMAL_STEP.powi(2) * l.powi(6) / 6.0, "directions": detail })),
        );
        s.diagnostic(
            format!("momentum sign convention (lambda={lambda})"),
            anchors::INFINITESIMAL,
            json!({
                "flow_derivative_residual": worst,
                "i_times_flow_derivative_smallest_residual": alt,
                "consistent": if worst < alt { "flow derivative" } else { "i times flow derivative" },
            }),
        );
        Ok(())
    }
}

impl Suite for RepSuite {
    fn name(&self) -> &'static str {
        "verify-rep"
    }

    fn description(&self) -> &'static str {
        "unitaries on the sphere: composition, unitarity, generators"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutput, SuiteError> {
        let mut s = Section::default();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for lambda in &cfg.lambdas {
            Self::group_checks(cfg, lambda, &mut rng, &mut s)?;
            Self::unitarity_checks(cfg, lambda, &mut rng, &mut s)?;
            Self::generator_checks(cfg, lambda, &mut s)?;
        }
        for lambda in &cfg.infinitesimal_lambdas {
            Self::infinitesimal_checks(cfg, lambda, &mut s)?;
        }

        // Plot data: a unitary applied to a Gaussian bump on the first radius.
        let lambda = cfg.lambdas.first().ok_or_else(|| SuiteError::Precondition("no lambda given".into()))?;
        let grid = Self::pointwise_grid(cfg, lambda)?;
        let (f, _) = gaussian_pair(lambda);
        let g = GroupElement::from_factors(Vector3::new(0.5, -0.25, 1.0), 0.7, -0.4, 1.3);
        let u = unitary(&g, lambda);
        let mut csv = String::from("sigma1,sigma2,sigma3,f_re,f_im,uf_re,uf_im\n");
        for p in &grid.nodes {
            let (a, b) = (f.eval(p), u.apply_at(&f, p));
            let _ = writeln!(csv, "{:e},{:e},{:e},{:e},{:e},{:e},{:e}", p[0], p[1], p[2], a.re, a.im, b.re, b.im);
        }
        let _ = exact_residual;
        Ok(SuiteOutput { section: s, csv: Some(csv) })
    }
}
