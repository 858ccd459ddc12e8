//! Character eigenfunctions of the translation energies.
//!
//! `f_χ = exp(2i[s2(t1 − χ1) + s1(t2 − χ2)]/λ) ψ(t)` solves
//! `f ⋆ Ẽ_i = χ(Ẽ_i) f` with `χ(Ẽ1) = λ`, `χ(Ẽ2) = λ²χ1`, `χ(Ẽ3) = λ²χ2`.

use std::collections::BTreeMap;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Coeff, Expr, GaussianRational, NormalForm, ZeroTest, ZeroTestConfig};
use crate::lie::AlgebraElement;
use crate::moyal::{moyal_bracket, solve_bivector, star, StarConfig};
use crate::orbit::{energy_with, ChartConvention, Lambda, PhaseSpaceFunction};
use crate::repn::l_left;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarizationError {
    #[error("profile must depend on t1, t2 only, but mentions {0}")]
    ProfileDependsOnFiber(String),
    #[error("pairing ({0}, {1}) is not realized on this chart; use (1, 2) or (2, 1)")]
    BadPairing(usize, usize),
    #[error("translation index must be 1, 2 or 3, got {0}")]
    BadIndex(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Character {
    #[serde(serialize_with = "ser_gaussian")]
    pub chi1: GaussianRational,
    #[serde(serialize_with = "ser_gaussian")]
    pub chi2: GaussianRational,
    pub lambda: Lambda,
}

fn ser_gaussian<S: serde::Serializer>(g: &GaussianRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&Coeff::Exact(g.clone()).to_atom())
}

impl Character {
    pub fn new(chi1: GaussianRational, chi2: GaussianRational, lambda: Lambda) -> Self {
        Self { chi1, chi2, lambda }
    }

    pub fn chi(&self, k: usize) -> &GaussianRational {
        if k == 1 {
            &self.chi1
        } else {
            &self.chi2
        }
    }

    /// `χ(Ẽ_i)` with the `e_i` factor removed.
    pub fn value(&self, i: usize) -> Result<Expr, PolarizationError> {
        let l2 = Expr::rational(self.lambda.squared());
        match i {
            1 => Ok(self.lambda.expr()),
            2 | 3 => Ok(l2 * Expr::Const(Coeff::Exact(self.chi(i - 1).clone()))),
            _ => Err(PolarizationError::BadIndex(i)),
        }
    }
}

/// `Ẽ_i` as a chart function: `λ`, `λ²t1`, `λ²t2`.
pub fn e_tilde(i: usize, lambda: &Lambda) -> Result<PhaseSpaceFunction, PolarizationError> {
    if !(1..=3).contains(&i) {
        return Err(PolarizationError::BadIndex(i));
    }
    let e = AlgebraElement::basis(i + 3).expect("translation basis index");
    // Translation energies do not involve the fiber assignment.
    Ok(energy_with(&e, lambda, &ChartConvention::default()))
}

#[derive(Clone, Debug)]
pub struct PolarizedFunction {
    pub chi: Character,
    pub psi: Expr,
    pub phase: Expr,
    pub expr: Expr,
}

/// `(2i/λ)[s2(t1 − c1) + s1(t2 − c2)]` for arbitrary expressions `c1, c2`.
fn phase_of(c1: Expr, c2: Expr, lambda: &Lambda) -> Expr {
    let k = Expr::product(vec![Expr::int(2), Expr::i(), Expr::pow(lambda.expr(), -1)]);
    let inner = Expr::var("s2") * (Expr::var("t1") - c1) + Expr::var("s1") * (Expr::var("t2") - c2);
    k * inner
}

pub fn make_f_chi(chi: &Character, psi: &Expr) -> Result<PolarizedFunction, PolarizationError> {
    if let Some(v) = psi.variables().into_iter().find(|v| v != "t1" && v != "t2") {
        return Err(PolarizationError::ProfileDependsOnFiber(v));
    }
    let c = |g: &GaussianRational| Expr::Const(Coeff::Exact(g.clone()));
    let phase = phase_of(c(&chi.chi1), c(&chi.chi2), &chi.lambda);
    let expr = Expr::exp(phase.clone()) * psi.clone();
    Ok(PolarizedFunction { chi: chi.clone(), psi: psi.clone(), phase, expr })
}

/// `(λ/2i) ∂f/∂s_j − (t_i − χ_i) f` for the pairings `(1, 2)` and `(2, 1)`.
pub fn ode_residual(f: &Expr, chi: &Character, pairing: (usize, usize)) -> Result<Expr, PolarizationError> {
    let (i, j) = pairing;
    if !matches!(pairing, (1, 2) | (2, 1)) {
        return Err(PolarizationError::BadPairing(i, j));
    }
    let k = Expr::product(vec![Expr::ratio(-1, 2), Expr::i(), chi.lambda.expr()]);
    let shift = Expr::var(&format!("t{i}")) - Expr::Const(Coeff::Exact(chi.chi(i).clone()));
    Ok((k * f.differentiate(&format!("s{j}")) - shift * f.clone()).simplify())
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenCheck {
    pub index: usize,
    pub residual: String,
    #[serde(flatten)]
    pub zero: ZeroTest,
}

/// `f ⋆ Ẽ_i − χ(Ẽ_i) f`; the series stops at first order since `Ẽ_i` is linear.
pub fn eigen_check(
    f: &PolarizedFunction,
    i: usize,
    cfg: &StarConfig,
    zero: &ZeroTestConfig,
) -> Result<EigenCheck, PolarizationError> {
    let e = e_tilde(i, &f.chi.lambda)?.expr;
    let prod = star(&f.expr, &e, cfg);
    let target = (f.chi.value(i)? * f.expr.clone()).normal_form();
    let r = prod.value.sub(&target);
    Ok(EigenCheck { index: i, residual: r.to_expr().to_string(), zero: ZeroTest::run_normal(&r, zero) })
}

/// Pairwise Moyal brackets of `Ẽ1, Ẽ2, Ẽ3` all vanish.
pub fn translation_energies_commute(lambda: &Lambda, cfg: &StarConfig) -> bool {
    (1..=3).all(|i| {
        (1..=3).all(|j| {
            let (a, b) = (e_tilde(i, lambda).unwrap().expr, e_tilde(j, lambda).unwrap().expr);
            moyal_bracket(&a, &b, cfg).value.is_zero()
        })
    })
}

/// `l_U f_χ = e^{phase} φ(t)` for some `φ` free of `s`: true when the
/// quotient by the phase factor no longer mentions `s1` or `s2`.
pub fn stays_polarized(u: &AlgebraElement, f: &PolarizedFunction, conv: &ChartConvention, cfg: &StarConfig) -> bool {
    let out = l_left(u, &f.expr, &f.chi.lambda, conv, cfg);
    let quotient: NormalForm = (out * Expr::exp(-f.phase.clone())).normal_form();
    !quotient.depends_on("s1") && !quotient.depends_on("s2")
}

/// Profiles of degree at most two in `(t1, t2)`.
pub fn profile_family() -> Vec<Expr> {
    ["1", "t1", "t2", "t1*t2 - 3", "t1^2 + 2*i*t2", "1/2*t2^2 - t1 + 5"]
        .into_iter()
        .map(|p| crate::expr::parse(p).expect("valid literal"))
        .collect()
}

/// A 3×3 grid of characters with `|χ_i| ≤ 2`.
pub fn character_grid(lambda: &Lambda) -> Vec<Character> {
    use crate::expr::rational;
    let values = [
        GaussianRational::real(rational(-2, 1)),
        GaussianRational::real(rational(1, 2)),
        GaussianRational::new(rational(1, 1), rational(1, 1)),
    ];
    let mut out = Vec::new();
    for a in &values {
        for b in &values {
            out.push(Character::new(a.clone(), b.clone(), lambda.clone()));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ConventionCandidate {
    pub convention: String,
    /// The covariance system has an exact solution.
    pub solvable: bool,
    /// Every eigen check on the probe family vanishes under the solved bivector.
    pub eigen_exact: bool,
}

/// Try every signed fiber assignment: which ones admit an exactly covariant
/// bivector that also makes the character family eigenfunctions.
pub fn convention_search(lambda: &Lambda, zero: &ZeroTestConfig) -> Vec<ConventionCandidate> {
    let chi = Character::new(
        GaussianRational::real(crate::expr::rational(1, 2)),
        GaussianRational::new(crate::expr::rational(-1, 1), crate::expr::rational(1, 3)),
        lambda.clone(),
    );
    let f = make_f_chi(&chi, &crate::expr::parse("1 + t1*t2").expect("valid literal")).expect("profile in t");
    ChartConvention::all_signed()
        .into_iter()
        .map(|conv| {
            let sol = solve_bivector(lambda, &conv).ok().filter(|s| s.exact);
            let eigen_exact = sol.as_ref().is_some_and(|s| {
                let cfg = StarConfig::new(s.matrix.clone());
                (1..=3).all(|i| eigen_check(&f, i, &cfg, zero).is_ok_and(|c| c.zero.is_zero))
            });
            ConventionCandidate { convention: conv.name.clone(), solvable: sol.is_some(), eigen_exact }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SuperpositionDemo {
    pub half_width: f64,
    pub nodes: usize,
    /// Largest gap between the quadrature superposition and its closed form.
    pub max_error: f64,
    /// `∫_{|s_j| ≤ S} |∫ f_χ dχ|² ds` at the profile's reference point.
    pub l2_truncated: f64,
    /// `(2πλB)² |ψ|²`, the full-plane value.
    pub l2_closed: f64,
    /// Bound on the part of the integral outside the truncation window.
    pub tail_bound: f64,
    pub truncation: f64,
}

/// Superpose `f_χ` over `χ ∈ [−B, B]²` by Gauss–Legendre quadrature, compare
/// with `ψ e^{2i(s2t1+s1t2)/λ} Π λ sin(2Bs_j/λ)/s_j`, and check the result is
/// square integrable in `s`.
pub fn superposition_demo(lambda: &Lambda, psi: &Expr, half_width: f64, nodes: usize) -> SuperpositionDemo {
    let l = lambda.to_f64();
    let b = half_width;
    let family = Expr::exp(phase_of(Expr::var("chi1"), Expr::var("chi2"), lambda)) * psi.clone();
    let ev = family.evaluator(&["s1", "s2", "t1", "t2", "chi1", "chi2"]).expect("family variables");
    let psi_ev = psi.evaluator(&["t1", "t2"]).expect("profile in t");
    let gl = GaussLegendre::new(nodes).expect("at least two nodes");
    let pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().iter().map(|&(x, w)| (b * x, b * w)).collect();

    let superposed = |p: [f64; 4]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(c1, w1) in &pairs {
            for &(c2, w2) in &pairs {
                acc += ev.eval(&[p[0], p[1], p[2], p[3], c1, c2]) * (w1 * w2);
            }
        }
        acc
    };
    let sinc = |s: f64| if s == 0.0 { 2.0 * b } else { l * (2.0 * b * s / l).sin() / s };
    let closed = |p: [f64; 4]| -> Complex64 {
        let ph = Complex64::new(0.0, 2.0 * (p[1] * p[2] + p[0] * p[3]) / l).exp();
        psi_ev.eval(&[p[2], p[3]]) * ph * sinc(p[0]) * sinc(p[1])
    };
    let samples = [[0.0, 0.0, 0.0, 0.0], [0.7, -1.3, 0.4, 1.1], [-2.5, 0.2, -0.6, 0.3], [1.9, 2.8, 1.5, -0.9]];
    let max_error = samples.iter().map(|&p| (superposed(p) - closed(p)).norm()).fold(0.0, f64::max);

    // The superposition factors per fiber axis; integrate one axis numerically.
    // Across the window the χ-integrand winds through 4BS/λ radians, so the
    // axis rule needs more nodes than the pointwise comparison.
    let truncation = 100.0;
    let axis_nodes = nodes.max((3.0 * b * truncation / l) as usize + 64);
    let axis_rule: Vec<(f64, f64)> = GaussLegendre::new(axis_nodes)
        .expect("at least two nodes")
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (b * x, b * w))
        .collect();
    let axis = |s: f64| -> Complex64 {
        axis_rule.iter().map(|&(c, w)| Complex64::new(0.0, -2.0 * s * c / l).exp() * w).sum()
    };
    let panel = GaussLegendre::new(16).expect("valid degree");
    let mut one_axis = 0.0;
    let mut a = -truncation;
    while a < truncation {
        one_axis += panel.integrate(a, a + 1.0, |s| axis(s).norm_sqr());
        a += 1.0;
    }
    let psi0 = psi_ev.eval(&[0.0, 0.0]).norm_sqr();
    let per_axis = 2.0 * std::f64::consts::PI * l * b;
    // Outside |s| ≤ S each axis loses at most 2λ²/S.
    let tail = 2.0 * l * l / truncation;
    SuperpositionDemo {
        half_width: b,
        nodes,
        max_error,
        l2_truncated: one_axis * one_axis * psi0,
        l2_closed: per_axis * per_axis * psi0,
        tail_bound: (2.0 * per_axis * tail) * psi0,
        truncation,
    }
}

/// Exact substitution of chart values into a polarized function, for spot checks.
pub fn evaluate_at(f: &PolarizedFunction, s1: f64, s2: f64, t1: f64, t2: f64) -> Complex64 {
    let b: BTreeMap<String, f64> =
        [("s1", s1), ("s2", s2), ("t1", t1), ("t2", t2)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    f.expr.evaluate(&b).expect("chart variables bound")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, rational};

    fn lam(n: i64, d: i64) -> Lambda {
        Lambda::from_ratio(n, d).unwrap()
    }

    fn solved(l: &Lambda) -> StarConfig {
        StarConfig::new(solve_bivector(l, &ChartConvention::polarized()).unwrap().matrix)
    }

    #[test]
    fn energies() {
        let l = lam(1, 1);
        assert!((e_tilde(2, &l).unwrap().expr - parse("t1").unwrap()).is_zero().is_zero);
        assert!((e_tilde(1, &lam(3, 2)).unwrap().expr - parse("3/2").unwrap()).is_zero().is_zero);
        assert!(e_tilde(4, &l).is_err());
        assert!(translation_energies_commute(&lam(3, 1), &solved(&lam(3, 1))));
    }

    #[test]
    fn family_examples() {
        let l = lam(1, 1);
        let zero = Character::new(GaussianRational::zero(), GaussianRational::zero(), l.clone());
        let f = make_f_chi(&zero, &Expr::one()).unwrap();
        assert!((f.expr.clone() - parse("exp(2*i*(s2*t1 + s1*t2))").unwrap()).is_zero().is_zero);
        assert!(make_f_chi(&zero, &parse("s1").unwrap()).is_err());

        let chi = Character::new(GaussianRational::real(rational(1, 2)), GaussianRational::real(rational(-1, 1)), l);
        let f = make_f_chi(&chi, &Expr::one()).unwrap();
        assert!((evaluate_at(&f, 0.7, -0.2, 0.5, -1.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for p in [(1, 2), (2, 1)] {
            assert!(ode_residual(&f.expr, &chi, p).unwrap().is_zero().is_zero);
        }
        assert!(ode_residual(&f.expr, &chi, (1, 1)).is_err());
        let c = ode_residual(&Expr::one(), &chi, (1, 2)).unwrap();
        assert!(!c.is_zero().is_zero);
    }

    #[test]
    fn eigenfunctions_under_the_solved_bivector() {
        let l = lam(3, 1);
        let cfg = solved(&l);
        let z = ZeroTestConfig::default();
        let chi = &character_grid(&l)[5];
        let f = make_f_chi(chi, &parse("t1*t2 - 3").unwrap()).unwrap();
        for i in 1..=3 {
            let r = eigen_check(&f, i, &cfg, &z).unwrap();
            assert!(r.zero.is_zero && r.zero.is_symbolic(), "{i}: {}", r.residual);
        }
        let not = PolarizedFunction { expr: parse("s1*t2").unwrap(), ..f.clone() };
        assert!(!eigen_check(&not, 2, &cfg, &z).unwrap().zero.is_zero);
        let conv = ChartConvention::polarized();
        for k in 4..=6 {
            assert!(stays_polarized(&AlgebraElement::basis(k).unwrap(), &f, &conv, &cfg));
        }
    }

    #[test]
    fn only_the_polarized_assignment_survives() {
        let found: Vec<_> = convention_search(&lam(1, 1), &ZeroTestConfig::default())
            .into_iter()
            .filter(|c| c.solvable && c.eigen_exact)
            .collect();
        assert_eq!(found.len(), 1);
        let conv = ChartConvention::by_name(&found[0].convention).unwrap();
        assert!(conv.same_assignment(&ChartConvention::polarized()));
    }

    #[test]
    fn superposition() {
        let d = superposition_demo(&lam(1, 1), &parse("1 + t1").unwrap(), 1.0, 48);
        assert!(d.max_error < 1e-10, "{d:?}");
        assert!((d.l2_truncated - d.l2_closed).abs() <= d.tail_bound, "{d:?}");
    }
}
