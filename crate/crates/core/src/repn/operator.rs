use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::sphere::{SphereFunction, SPHERE_VARS};
use crate::expr::{Coeff, Evaluator, Expr};
use crate::lie::rotation_about;

/// Step size for black-box flow derivatives; three-level Richardson
/// extrapolation leaves an `O(h⁶)` truncation error.
pub const FLOW_STEP: f64 = 0.02;

/// A multiplier with its compiled evaluator.
#[derive(Clone)]
pub struct Multiplier {
    pub expr: Expr,
    eval: Evaluator,
}

impl Multiplier {
    pub fn new(expr: Expr) -> Self {
        let eval = expr.evaluator(&SPHERE_VARS).expect("multipliers use sigma1..3 only");
        Self { expr, eval }
    }
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

#[derive(Clone, Debug)]
pub enum Primitive {
    /// `f ↦ m·f`.
    Multiply(Multiplier),
    /// `f ↦ f(M·)`.
    RotatePullback(Matrix3<f64>),
    /// `f ↦ d/dθ f(exp(−θ X_j)·)` at `θ = 0`, for `j` in 1..=3.
    FlowDerivative(usize),
    Scale(Complex64),
}

/// Coordinate axis (0-based) that the rotation generator `X_j` turns about.
pub fn axis_of(j: usize) -> usize {
    assert!((1..=3).contains(&j), "rotation index {j} outside 1..=3");
    3 - j
}

impl Primitive {
    pub fn multiply(expr: Expr) -> Self {
        Self::Multiply(Multiplier::new(expr))
    }

    fn apply_symbolic(&self, f: &Expr) -> Expr {
        match self {
            Self::Multiply(m) => m.expr.clone() * f.clone(),
            Self::Scale(c) => Expr::Const(Coeff::complex(*c)) * f.clone(),
            Self::RotatePullback(m) => {
                let mut map = BTreeMap::new();
                for (i, v) in SPHERE_VARS.iter().enumerate() {
                    let row: Vec<Expr> = (0..3)
                        .filter(|&j| m[(i, j)] != 0.0)
                        .map(|j| Expr::Const(Coeff::float(m[(i, j)])) * Expr::var(SPHERE_VARS[j]))
                        .collect();
                    map.insert(v.to_string(), Expr::sum(row));
                }
                f.substitute_all(&map)
            }
            Self::FlowDerivative(j) => {
                // d/dθ f(exp(−θX)σ) = −(e × σ)·∇f with e the rotation axis.
                let a = axis_of(*j);
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                let sb = Expr::var(SPHERE_VARS[b]);
                let sc = Expr::var(SPHERE_VARS[c]);
                // e_a × σ = σ_b e_c − σ_c e_b
                sc * f.differentiate(SPHERE_VARS[b]) - sb * f.differentiate(SPHERE_VARS[c])
            }
        }
    }
}

/// A finite sum of compositions of primitives. Each chain `[A, B, C]`
/// acts as `A(B(C f))`.
#[derive(Clone, Debug, Default)]
pub struct Operator {
    pub terms: Vec<Vec<Primitive>>,
}

impl Operator {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn identity() -> Self {
        Self { terms: vec![Vec::new()] }
    }

    pub fn primitive(p: Primitive) -> Self {
        Self { terms: vec![vec![p]] }
    }

    pub fn chain(ps: Vec<Primitive>) -> Self {
        Self { terms: vec![ps] }
    }

    pub fn multiply(expr: Expr) -> Self {
        Self::primitive(Primitive::multiply(expr))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut c = a.clone();
                c.extend(b.iter().cloned());
                terms.push(c);
            }
        }
        Self { terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::primitive(Primitive::Scale(c)).compose(self)
    }

    /// `self ∘ other − other ∘ self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).add(&other.compose(self).scale(Complex64::new(-1.0, 0.0)))
    }

    /// Exact action on a symbolic function (chain rule for flow derivatives).
    pub fn apply_symbolic(&self, f: &Expr) -> Expr {
        let parts = self
            .terms
            .iter()
            .map(|chain| chain.iter().rev().fold(f.clone(), |acc, p| p.apply_symbolic(&acc)))
            .collect();
        Expr::sum(parts)
    }

    /// Pointwise action; flow derivatives use Richardson-extrapolated
    /// central differences of the pulled-back function.
    pub fn apply_at(&self, f: &SphereFunction, sigma: &[f64; 3]) -> Complex64 {
        self.terms.iter().map(|chain| eval_chain(chain, f, sigma)).sum()
    }

    /// Symbolic when `f` is symbolic, otherwise a lazily evaluated black box.
    pub fn apply(&self, f: &SphereFunction) -> SphereFunction {
        match f.expr() {
            Some(e) => SphereFunction::symbolic(self.apply_symbolic(e)),
            None => self.apply_pointwise(f),
        }
    }

    /// Always the pointwise route, even for symbolic `f`.
    pub fn apply_pointwise(&self, f: &SphereFunction) -> SphereFunction {
        let op = Arc::new(self.clone());
        let f = f.clone();
        SphereFunction::black_box(move |s| op.apply_at(&f, s))
    }
}

fn eval_chain(chain: &[Primitive], f: &SphereFunction, sigma: &[f64; 3]) -> Complex64 {
    let Some((head, rest)) = chain.split_first() else {
        return f.eval(sigma);
    };
    match head {
        Primitive::Multiply(m) => m.eval.eval(sigma) * eval_chain(rest, f, sigma),
        Primitive::Scale(c) => c * eval_chain(rest, f, sigma),
        Primitive::RotatePullback(m) => {
            let p = m * Vector3::from(*sigma);
            eval_chain(rest, f, &[p.x, p.y, p.z])
        }
        Primitive::FlowDerivative(j) => {
            let axis = axis_of(*j);
            let at = |theta: f64| {
                let p = rotation_about(axis, -theta) * Vector3::from(*sigma);
                eval_chain(rest, f, &[p.x, p.y, p.z])
            };
            richardson(&at, FLOW_STEP)
        }
    }
}

/// Derivative at 0 from central differences at `h, h/2, h/4`.
pub fn richardson(g: &dyn Fn(f64) -> Complex64, h: f64) -> Complex64 {
    let d = |s: f64| (g(s) - g(-s)) / (2.0 * s);
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (d2 * 4.0 - d1) / 3.0;
    let r2 = (d3 * 4.0 - d2) / 3.0;
    (r2 * 16.0 - r1) / 15.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn flow_derivative_routes_agree() {
        let f = SphereFunction::parse("sigma1^2*sigma2 + exp(i*sigma3)").unwrap();
        let pt = [0.3, -0.5, 0.81];
        for j in 1..=3 {
            let op = Operator::primitive(Primitive::FlowDerivative(j));
            let sym = op.apply(&f).eval(&pt);
            let num = op.apply_pointwise(&f).eval(&pt);
            assert!((sym - num).norm() < 1e-11, "X{j}: {sym} vs {num}");
        }
    }

    #[test]
    fn stabilized_direction() {
        let op = Operator::primitive(Primitive::FlowDerivative(3));
        let out = op.apply_symbolic(&parse("sigma1").unwrap());
        assert!(out.is_zero().is_zero);
    }

    #[test]
    fn composition_order() {
        let m = Operator::multiply(parse("sigma1").unwrap());
        let r = Operator::primitive(Primitive::RotatePullback(rotation_about(2, std::f64::consts::FRAC_PI_2)));
        let f = SphereFunction::parse("sigma2").unwrap();
        // (m ∘ r) f = σ1 · f(Rσ) = σ1 · σ1 for a quarter turn about the third axis.
        let v = m.compose(&r).apply(&f).eval(&[2.0, 0.0, 0.0]);
        assert!((v - Complex64::new(4.0, 0.0)).norm() < 1e-14);
        let c = m.commutator(&m).apply(&f).eval(&[1.0, 2.0, 3.0]);
        assert!(c.norm() < 1e-14);
    }
}
