use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::operator::{axis_of, richardson, Operator, Primitive};
use super::quadrature::QuadratureGrid;
use super::sphere::{SphereFunction, SPHERE_VARS};
use super::RepnError;
use crate::expr::{rational_to_f64, Coeff, Expr, Rational, ZeroTest, ZeroTestConfig};
use num_traits::Zero;
use crate::lie::{exp_axis, rotation_about, AlgebraElement, GroupElement};
use crate::orbit::Lambda;

/// `E_i ↦ iλσ_i`, `X_j ↦` the flow derivative `d/dθ f(exp(−θX_j)σ)`,
/// extended linearly.
pub fn generator(u: &AlgebraElement, lambda: &Lambda) -> Operator {
    let mut op = Operator::zero();
    for k in 1..=3 {
        let e = u.e(k);
        if !e.is_zero() {
            let m = Expr::product(vec![
                Expr::i(),
                lambda.expr(),
                Expr::rational(e.clone()),
                Expr::var(SPHERE_VARS[k - 1]),
            ]);
            op = op.add(&Operator::multiply(m));
        }
        let x = u.x(k);
        if !x.is_zero() {
            let flow = Operator::primitive(Primitive::FlowDerivative(k));
            let c = rational_to_f64(x);
            op = op.add(&if c == 1.0 { flow } else { flow.scale(Complex64::new(c, 0.0)) });
        }
    }
    op
}

/// Multiplication by `e^{iλ r·σ}`; the identity for `r = 0`.
fn phase(r: &Vector3<f64>, lambda: f64) -> Operator {
    let terms: Vec<Expr> = (0..3)
        .filter(|&k| r[k] != 0.0)
        .map(|k| Expr::Const(Coeff::complex(Complex64::new(0.0, lambda * r[k]))) * Expr::var(SPHERE_VARS[k]))
        .collect();
    if terms.is_empty() {
        Operator::identity()
    } else {
        Operator::multiply(Expr::exp(Expr::sum(terms)))
    }
}

/// `exp(r·E) exp(θ1X1) exp(θ2X2) exp(θ3X3)` acting factor by factor: the
/// phase, then the three rotation pullbacks `f(exp(−θ_jX_j)·)`.
pub fn unitary_from_factors(r: &Vector3<f64>, theta: [f64; 3], lambda: &Lambda) -> Operator {
    let mut chain = phase(r, lambda.to_f64()).terms.remove(0);
    for (j, th) in (1..=3).zip(theta) {
        if th != 0.0 {
            chain.push(Primitive::RotatePullback(rotation_about(axis_of(j), -th)));
        }
    }
    Operator::chain(chain)
}

/// The factored unitary of `g`, through its Euler factors.
pub fn unitary(g: &GroupElement, lambda: &Lambda) -> Operator {
    let (r, t1, t2, t3) = g.to_factors();
    unitary_from_factors(&r, [t1, t2, t3], lambda)
}

/// `(Uf)(σ) = e^{iλ r·σ} f(R⁻¹σ)` straight from the matrix.
pub fn reference_unitary(g: &GroupElement, lambda: &Lambda) -> Operator {
    let mut chain = phase(&g.translation, lambda.to_f64()).terms.remove(0);
    chain.push(Primitive::RotatePullback(g.rotation.transpose()));
    Operator::chain(chain)
}

fn sup_over_nodes(grid: &QuadratureGrid, a: &Operator, b: &Operator, f: &SphereFunction) -> f64 {
    grid.nodes.par_iter().map(|s| (a.apply_at(f, s) - b.apply_at(f, s)).norm()).reduce(|| 0.0, f64::max)
}

/// `max |U_g f − U^ref_g f|` over nodes and test functions.
pub fn factored_vs_reference(
    r: &Vector3<f64>,
    theta: [f64; 3],
    lambda: &Lambda,
    testfs: &[SphereFunction],
    grid: &QuadratureGrid,
) -> f64 {
    let g = GroupElement::from_factors(*r, theta[0], theta[1], theta[2]);
    let a = unitary_from_factors(r, theta, lambda);
    let b = reference_unitary(&g, lambda);
    testfs.iter().map(|f| sup_over_nodes(grid, &a, &b, f)).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct HomomorphismResidual {
    /// `max |U_g U_h f − U_{gh} f|` with factored unitaries.
    pub factored: f64,
    /// The same with reference unitaries.
    pub reference: f64,
}

pub fn homomorphism_check(
    g: &GroupElement,
    h: &GroupElement,
    lambda: &Lambda,
    testfs: &[SphereFunction],
    grid: &QuadratureGrid,
) -> HomomorphismResidual {
    let gh = g.mul(h);
    let fac = unitary(g, lambda).compose(&unitary(h, lambda));
    let fac_gh = unitary(&gh, lambda);
    let rf = reference_unitary(g, lambda).compose(&reference_unitary(h, lambda));
    let rf_gh = reference_unitary(&gh, lambda);
    let worst = |a: &Operator, b: &Operator| testfs.iter().map(|f| sup_over_nodes(grid, a, b, f)).fold(0.0, f64::max);
    HomomorphismResidual { factored: worst(&fac, &fac_gh), reference: worst(&rf, &rf_gh) }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitarityResult {
    /// `|⟨U f, U h⟩ − ⟨f, h⟩|` on the supplied grid.
    pub deviation: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Same deviation on the grid where successive doublings agreed.
    pub refined_deviation: f64,
    pub refined_n_theta: usize,
    pub converged: bool,
}

/// Successive doublings stop once both inner products move by less than this.
pub const REFINEMENT_TOL: f64 = 1e-10;
const MAX_REFINEMENTS: usize = 4;

pub fn unitarity_check(
    g: &GroupElement,
    lambda: &Lambda,
    f: &SphereFunction,
    h: &SphereFunction,
    grid: &QuadratureGrid,
) -> Result<UnitarityResult, RepnError> {
    let u = unitary(g, lambda);
    let (uf, uh) = (u.apply_pointwise(f), u.apply_pointwise(h));
    let pair = |q: &QuadratureGrid| (q.inner(&uf, &uh), q.inner(f, h));
    let (a0, b0) = pair(grid);
    let deviation = (a0 - b0).norm();
    let (mut prev, mut q, mut converged) = ((a0, b0), grid.clone(), false);
    for _ in 0..MAX_REFINEMENTS {
        q = q.refined()?;
        let next = pair(&q);
        let moved = (next.0 - prev.0).norm().max((next.1 - prev.1).norm());
        prev = next;
        if moved < REFINEMENT_TOL {
            converged = true;
            break;
        }
    }
    Ok(UnitarityResult {
        deviation,
        n_theta: grid.n_theta,
        n_phi: grid.n_phi,
        refined_deviation: (prev.0 - prev.1).norm(),
        refined_n_theta: q.n_theta,
        converged,
    })
}

/// `U_{exp(tU)}` through the factored route.
pub fn one_parameter(u: &AlgebraElement, t: f64, lambda: &Lambda) -> Operator {
    let w = u.rotation_axis().map(|c| t * rational_to_f64(&c));
    let v = u.translation().map(|c| t * rational_to_f64(&c));
    unitary(&exp_axis(&Vector3::from(w), &Vector3::from(v)), lambda)
}

#[derive(Clone, Debug, Serialize)]
pub struct InfinitesimalResidual {
    /// `max |(U_{exp(tU)} f − U_{exp(−tU)} f)/2t − gen(U) f|` over nodes.
    pub residual: f64,
    /// The same against `gen` with the rotation part multiplied by `i`,
    /// the other sign convention for the momentum operator.
    pub alternative_residual: f64,
}

pub fn infinitesimal_check(
    u: &AlgebraElement,
    lambda: &Lambda,
    f: &SphereFunction,
    grid: &QuadratureGrid,
    t: f64,
) -> InfinitesimalResidual {
    let plus = one_parameter(u, t, lambda);
    let minus = one_parameter(u, -t, lambda);
    let gen = generator(u, lambda);
    let alt = alternative_generator(u, lambda);
    let diff = |s: &[f64; 3]| (plus.apply_at(f, s) - minus.apply_at(f, s)) / (2.0 * t);
    let (r, a) = grid
        .nodes
        .par_iter()
        .map(|s| {
            let d = diff(s);
            ((d - gen.apply_at(f, s)).norm(), (d - alt.apply_at(f, s)).norm())
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    InfinitesimalResidual { residual: r, alternative_residual: a }
}

fn alternative_generator(u: &AlgebraElement, lambda: &Lambda) -> Operator {
    let trans = AlgebraElement::new(std::array::from_fn(|_| Rational::zero()), std::array::from_fn(|k| u.e(k + 1).clone()));
    let rot = AlgebraElement::new(std::array::from_fn(|k| u.x(k + 1).clone()), std::array::from_fn(|_| Rational::zero()));
    generator(&trans, lambda).add(&generator(&rot, lambda).scale(Complex64::i()))
}

/// Interior times of the Cauchy-problem check.
pub const CAUCHY_TIMES: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
/// Base step of the extrapolated time derivative.
pub const CAUCHY_STEP: f64 = 0.02;

/// `max |dT/dt − gen(U) T(t)|` over nodes and [`CAUCHY_TIMES`], where
/// `T(t) = U_{exp(tU)} f` and `dT/dt` is an extrapolated central difference.
pub fn cauchy_check(u: &AlgebraElement, lambda: &Lambda, f: &SphereFunction, grid: &QuadratureGrid) -> f64 {
    let gen = generator(u, lambda);
    CAUCHY_TIMES
        .iter()
        .map(|&t| {
            let rhs = gen.compose(&one_parameter(u, t, lambda));
            grid.nodes
                .par_iter()
                .map(|s| {
                    let d = richardson(&|h| one_parameter(u, t + h, lambda).apply_at(f, s), CAUCHY_STEP);
                    (d - rhs.apply_at(f, s)).norm()
                })
                .reduce(|| 0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorBracketResidual {
    /// `[gen U, gen T] f − gen([U,T]) f` simplifies to zero for every test function.
    pub symbolic_zero: bool,
    /// Pointwise residual with flow derivatives taken by finite differences.
    pub pointwise: f64,
}

pub fn generator_bracket_check(
    u: &AlgebraElement,
    t: &AlgebraElement,
    lambda: &Lambda,
    testfs: &[SphereFunction],
    grid: &QuadratureGrid,
    zero: &ZeroTestConfig,
) -> GeneratorBracketResidual {
    let lhs = generator(u, lambda).commutator(&generator(t, lambda));
    let rhs = generator(&u.bracket(t), lambda);
    let mut symbolic_zero = true;
    let mut pointwise: f64 = 0.0;
    for f in testfs {
        if let Some(e) = f.expr() {
            let r = lhs.apply_symbolic(e) - rhs.apply_symbolic(e);
            symbolic_zero &= ZeroTest::run(&r, zero).is_zero;
        }
        let bb = f.clone().into_black_box();
        pointwise = pointwise.max(sup_over_nodes(grid, &lhs, &rhs, &bb));
    }
    GeneratorBracketResidual { symbolic_zero, pointwise }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(n: i64, d: i64) -> Lambda {
        Lambda::from_ratio(n, d).unwrap()
    }

    fn small_grid(radius: f64) -> QuadratureGrid {
        QuadratureGrid::new(6, 12, radius).unwrap()
    }

    #[test]
    fn generator_examples() {
        let l = lam(2, 1);
        let one = SphereFunction::parse("1").unwrap();
        let g = generator(&AlgebraElement::basis(4).unwrap(), &l).apply(&one);
        let v = g.eval(&[0.5, 1.0, 1.0]);
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn quarter_turn() {
        let l = lam(1, 1);
        let g = GroupElement::from_factors(Vector3::zeros(), std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        let f = SphereFunction::parse("sigma1 + 2*sigma2").unwrap();
        let s = [0.6, 0.8, 0.0];
        // R⁻¹σ = (σ2, −σ1, σ3) for a quarter turn about the third axis.
        let expect = Complex64::new(0.8 - 2.0 * 0.6, 0.0);
        assert!((unitary(&g, &l).apply_at(&f, &s) - expect).norm() < 1e-14);
        assert!((reference_unitary(&g, &l).apply_at(&f, &s) - expect).norm() < 1e-14);
    }

    #[test]
    fn factored_matches_reference_and_composes() {
        let l = lam(1, 2);
        let grid = small_grid(0.5);
        let tests: Vec<_> = SphereFunction::test_set().into_iter().map(|(_, f)| f).collect();
        let r = Vector3::new(0.3, -1.2, 0.7);
        assert!(factored_vs_reference(&r, [0.4, -1.1, 2.5], &l, &tests, &grid) < 1e-10);
        let g = GroupElement::from_factors(r, 0.4, -1.1, 2.5);
        let h = GroupElement::from_factors(Vector3::new(-0.5, 0.2, 0.9), -2.0, 0.3, 1.0);
        let res = homomorphism_check(&g, &h, &l, &tests, &grid);
        assert!(res.factored < 1e-10 && res.reference < 1e-10, "{res:?}");
        let inv = homomorphism_check(&g, &g.inverse(), &l, &tests, &grid);
        assert!(inv.factored < 1e-10);
    }

    #[test]
    fn unitarity_and_infinitesimal() {
        let l = lam(1, 1);
        let grid = QuadratureGrid::heuristic(1.0, 1.0, 1.0).unwrap();
        let f = SphereFunction::parse("exp(-(sigma1 - 1)^2)*sigma2").unwrap();
        let h = SphereFunction::parse("exp(-sigma3^2)").unwrap();
        let g = GroupElement::translation_only(Vector3::new(0.6, 0.0, 0.8));
        let u = unitarity_check(&g, &l, &f, &h, &grid).unwrap();
        assert!(u.deviation < 1e-8 && u.converged, "{u:?}");
        let e1x1 = AlgebraElement::from_ints([1, 0, 0, 1, 0, 0]);
        let small = small_grid(1.0);
        let r = infinitesimal_check(&e1x1, &l, &f, &small, 1e-4);
        assert!(r.residual < 1e-7, "{r:?}");
        assert!(r.alternative_residual > 1e-3);
        assert!(cauchy_check(&e1x1, &l, &f, &small) < 1e-8);
    }

    #[test]
    fn generator_brackets() {
        let l = lam(3, 2);
        let tests: Vec<_> = SphereFunction::test_set().into_iter().map(|(_, f)| f).collect();
        let grid = small_grid(1.5);
        for u in AlgebraElement::basis_all() {
            for t in AlgebraElement::basis_all() {
                let r = generator_bracket_check(&u, &t, &l, &tests, &grid, &ZeroTestConfig::default());
                assert!(r.symbolic_zero && r.pointwise < 1e-9, "{u} {t}: {r:?}");
            }
        }
    }
}
