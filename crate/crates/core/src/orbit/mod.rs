//! Coadjoint-orbit geometry on the four-dimensional orbits: classification,
//! the flat chart `(s1, s2, t1, t2)`, energy functions, Hamiltonian fields
//! and the Kirillov form.

mod symplectic;

pub use symplectic::{permutations4, SymplecticMatrix, CHART_VARS};
pub(crate) use symplectic::rank_of as rank_of_rows;

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::expr::{integer, parse_rational, rational_to_f64, Expr, Rational};
use crate::lie::{AlgebraElement, DualFunctional};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("orbit radius must be positive, got {0}")]
    NonPositiveLambda(String),
    #[error("cannot read `{0}` as a rational number")]
    BadLambda(String),
    #[error("unknown chart convention `{0}`")]
    UnknownConvention(String),
}

/// The orbit radius `λ = ‖α‖ > 0`, kept exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lambda(Rational);

impl Lambda {
    pub fn new(value: Rational) -> Result<Self, OrbitError> {
        if value.is_positive() {
            Ok(Self(value))
        } else {
            Err(OrbitError::NonPositiveLambda(value.to_string()))
        }
    }

    pub fn from_ratio(n: i64, d: i64) -> Result<Self, OrbitError> {
        Self::new(crate::expr::rational(n, d))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn squared(&self) -> Rational {
        &self.0 * &self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }

    pub fn expr(&self) -> Expr {
        Expr::rational(self.0.clone())
    }
}

impl FromStr for Lambda {
    type Err = OrbitError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let r = parse_rational(s).ok_or_else(|| OrbitError::BadLambda(s.to_string()))?;
        Self::new(r)
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Lambda {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OrbitKind {
    TrivialPoint,
    Sphere { radius: f64 },
    CotangentBundle { radius: f64 },
}

pub fn classify(f: &DualFunctional) -> OrbitKind {
    let mu = f.mu_vec().norm();
    let alpha = f.alpha_vec().norm();
    if alpha != 0.0 {
        OrbitKind::CotangentBundle { radius: alpha }
    } else if mu != 0.0 {
        OrbitKind::Sphere { radius: mu }
    } else {
        OrbitKind::TrivialPoint
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChartPoint {
    pub s1: f64,
    pub s2: f64,
    pub t1: f64,
    pub t2: f64,
}

impl ChartPoint {
    pub fn new(s1: f64, s2: f64, t1: f64, t2: f64) -> Self {
        Self { s1, s2, t1, t2 }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s1, self.s2, self.t1, self.t2]
    }
}

/// Base point of the chart over the sphere: `(λ, λ² t1, λ² t2)`.
pub fn chart_base(t1: f64, t2: f64, lambda: &Lambda) -> [f64; 3] {
    let l = lambda.to_f64();
    [l, l * l * t1, l * l * t2]
}

/// Which rotation generator a fiber coordinate is paired with, and the sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FiberSlot {
    /// Rotation index 1..=3, i.e. the generator `X_rotation`.
    pub rotation: usize,
    pub sign: i8,
}

/// Assignment of the fiber coordinates `s1`, `s2` to rotation coefficients
/// in the energy functions. The base coordinates are fixed:
/// `Ũ = … + λ e1 + λ² e2 t1 + λ² e3 t2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ChartConvention {
    pub name: String,
    pub s1: FiberSlot,
    pub s2: FiberSlot,
}

impl ChartConvention {
    /// `s1 ↔ x2`, `s2 ↔ x3`, both positive, read straight off the energy formula.
    pub fn literal() -> Self {
        Self::named("literal", (2, 1), (3, 1))
    }

    /// `s1 ↔ x2`, `s2 ↔ x1`: the fiber pairs with the two rotations that move
    /// the base point `(λ, 0, 0)`. Compatible with the Kirillov form as written.
    pub fn form_compatible() -> Self {
        Self::named("form-compatible", (2, 1), (1, 1))
    }

    /// `s1 ↔ −x2`, `s2 ↔ x1`: the unique signed assignment for which the
    /// origin covariance system is exactly solvable and the exponential
    /// polarized family is an exact star eigenfamily.
    pub fn polarized() -> Self {
        Self::named("polarized", (2, -1), (1, 1))
    }

    pub fn presets() -> Vec<Self> {
        vec![Self::literal(), Self::form_compatible(), Self::polarized()]
    }

    pub fn by_name(name: &str) -> Result<Self, OrbitError> {
        Self::presets()
            .into_iter()
            .chain(Self::all_signed())
            .find(|c| c.name == name)
            .ok_or_else(|| OrbitError::UnknownConvention(name.to_string()))
    }

    fn named(name: &str, s1: (usize, i8), s2: (usize, i8)) -> Self {
        Self {
            name: name.to_string(),
            s1: FiberSlot { rotation: s1.0, sign: s1.1 },
            s2: FiberSlot { rotation: s2.0, sign: s2.1 },
        }
    }

    /// All 24 assignments of distinct rotation indices with signs, named
    /// like `s1=-x2,s2=+x1`.
    pub fn all_signed() -> Vec<Self> {
        let mut out = Vec::with_capacity(24);
        for a in 1..=3 {
            for b in 1..=3 {
                if a == b {
                    continue;
                }
                for sa in [1i8, -1] {
                    for sb in [1i8, -1] {
                        let sign = |s: i8| if s > 0 { '+' } else { '-' };
                        let name = format!("s1={}x{a},s2={}x{b}", sign(sa), sign(sb));
                        out.push(Self::named(&name, (a, sa), (b, sb)));
                    }
                }
            }
        }
        out
    }

    /// True when both conventions pair the fibers identically.
    pub fn same_assignment(&self, other: &Self) -> bool {
        self.s1 == other.s1 && self.s2 == other.s2
    }

    fn fiber_coefficient(&self, slot: FiberSlot, u: &AlgebraElement, lambda: &Lambda) -> Rational {
        integer(slot.sign as i64) * u.x(slot.rotation) / lambda.squared()
    }
}

impl Default for ChartConvention {
    fn default() -> Self {
        Self::polarized()
    }
}

/// Dual coefficients over `(X1*, X2*, X3*, E1*, E2*, E3*)` of the chart point,
/// with the literal fiber assignment: `(0, s1/λ², s2/λ², λ, λ²t1, λ²t2)`.
pub fn chart_to_functional(c: &ChartPoint, lambda: &Lambda) -> [f64; 6] {
    chart_to_functional_with(c, lambda, &ChartConvention::literal())
}

pub fn chart_to_functional_with(c: &ChartPoint, lambda: &Lambda, conv: &ChartConvention) -> [f64; 6] {
    let l = lambda.to_f64();
    let mut out = [0.0, 0.0, 0.0, l, l * l * c.t1, l * l * c.t2];
    out[conv.s1.rotation - 1] += conv.s1.sign as f64 * c.s1 / (l * l);
    out[conv.s2.rotation - 1] += conv.s2.sign as f64 * c.s2 / (l * l);
    out
}

/// A function on the chart together with the orbit radius it lives on.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceFunction {
    pub expr: Expr,
    pub lambda: Lambda,
}

impl PhaseSpaceFunction {
    pub fn evaluate(&self, c: &ChartPoint) -> num_complex::Complex64 {
        let ev = self.expr.evaluator(&CHART_VARS).expect("chart function uses chart variables only");
        ev.eval(&c.as_array())
    }
}

/// Coefficients of the energy function in chart-variable order, plus the constant.
pub fn energy_coefficients(u: &AlgebraElement, lambda: &Lambda, conv: &ChartConvention) -> ([Rational; 4], Rational) {
    let l2 = lambda.squared();
    let lin = [
        conv.fiber_coefficient(conv.s1, u, lambda),
        conv.fiber_coefficient(conv.s2, u, lambda),
        &l2 * u.e(2),
        &l2 * u.e(3),
    ];
    (lin, lambda.value() * u.e(1))
}

fn linear_expr(lin: &[Rational; 4], constant: &Rational) -> Expr {
    let mut terms = Vec::new();
    for (c, v) in lin.iter().zip(CHART_VARS) {
        if !c.is_zero() {
            terms.push(Expr::product(vec![Expr::rational(c.clone()), Expr::var(v)]));
        }
    }
    if !constant.is_zero() {
        terms.push(Expr::rational(constant.clone()));
    }
    Expr::sum(terms)
}

/// `Ũ = x2/λ² s1 + x3/λ² s2 + λ e1 + λ² e2 t1 + λ² e3 t2`.
pub fn energy(u: &AlgebraElement, lambda: &Lambda) -> PhaseSpaceFunction {
    energy_with(u, lambda, &ChartConvention::literal())
}

pub fn energy_with(u: &AlgebraElement, lambda: &Lambda, conv: &ChartConvention) -> PhaseSpaceFunction {
    let (lin, c) = energy_coefficients(u, lambda, conv);
    PhaseSpaceFunction { expr: linear_expr(&lin, &c), lambda: lambda.clone() }
}

/// Coefficients of a vector field over `(∂s1, ∂s2, ∂t1, ∂t2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianField {
    pub coeffs: [Expr; 4],
}

impl HamiltonianField {
    /// `(−∂H/∂t1, −∂H/∂t2, ∂H/∂s1, ∂H/∂s2)`.
    pub fn of(h: &Expr) -> Self {
        let d = |v: &str| h.differentiate(v);
        Self { coeffs: [-d("t1"), -d("t2"), d("s1"), d("s2")] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero().is_zero)
    }

    /// Exact values, when every coefficient is a rational constant.
    pub fn constant_values(&self) -> Option<[Rational; 4]> {
        let vals: Option<Vec<Rational>> = self
            .coeffs
            .iter()
            .map(|c| c.exact_value().filter(|g| g.is_real()).map(|g| g.re))
            .collect();
        vals.map(|v| v.try_into().expect("four entries"))
    }
}

/// Field of the literal energy: `(−λ²e2, −λ²e3, x2/λ², x3/λ²)`.
pub fn hamiltonian_field(u: &AlgebraElement, lambda: &Lambda) -> HamiltonianField {
    HamiltonianField::of(&energy(u, lambda).expr)
}

pub fn hamiltonian_field_with(u: &AlgebraElement, lambda: &Lambda, conv: &ChartConvention) -> HamiltonianField {
    HamiltonianField::of(&energy_with(u, lambda, conv).expr)
}

/// The standard antisymmetric matrix with `(s1,t2) = −1`, `(s2,t1) = +1`.
pub fn unit_kirillov_matrix() -> SymplecticMatrix {
    SymplecticMatrix::from_ints([[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]]).expect("antisymmetric")
}

#[derive(Clone, Debug, Serialize)]
pub struct KirillovMatrices {
    /// Matrix of `λ(dt2∧ds1 + ds2∧dt1)`.
    pub form: SymplecticMatrix,
    /// The same pattern with unit entries.
    pub unit: SymplecticMatrix,
    /// `form = scale · unit`.
    pub scale: String,
    /// True when the two normalizations differ, i.e. `λ ≠ 1`.
    pub scale_discrepancy: bool,
}

pub fn kirillov_matrix(lambda: &Lambda) -> KirillovMatrices {
    let unit = unit_kirillov_matrix();
    KirillovMatrices {
        form: unit.scale(lambda.value()),
        unit,
        scale: lambda.value().to_string(),
        scale_discrepancy: !lambda.value().is_one(),
    }
}

/// `ω(ξ_U, ξ_T)` for the Kirillov form with the fields of `conv`.
pub fn form_on_fields(u: &AlgebraElement, t: &AlgebraElement, lambda: &Lambda, conv: &ChartConvention) -> Expr {
    let form = kirillov_matrix(lambda).form;
    let a = hamiltonian_field_with(u, lambda, conv);
    let b = hamiltonian_field_with(t, lambda, conv);
    form.pair(&a.coeffs, &b.coeffs)
}

/// Componentwise `i(ξ_U)ω − dŨ`; all zero when the field is Hamiltonian for the form.
pub fn contraction_residual(u: &AlgebraElement, lambda: &Lambda, conv: &ChartConvention) -> [Expr; 4] {
    let form = kirillov_matrix(lambda).form;
    let h = energy_with(u, lambda, conv).expr;
    let field = HamiltonianField::of(&h);
    let contracted = form.contract_left(&field.coeffs);
    std::array::from_fn(|j| contracted[j].clone() - h.differentiate(CHART_VARS[j]))
}

/// Evaluate an expression over chart variables at the chart origin, exactly.
pub fn at_origin(e: &Expr) -> Expr {
    let zero = Expr::zero();
    let mut map = std::collections::BTreeMap::new();
    for v in CHART_VARS {
        map.insert(v.to_string(), zero.clone());
    }
    e.substitute_all(&map).simplify()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rational;

    fn lam(n: i64, d: i64) -> Lambda {
        Lambda::from_ratio(n, d).unwrap()
    }

    #[test]
    fn lambda_must_be_positive() {
        assert!(Lambda::from_ratio(0, 1).is_err());
        assert!("-1/2".parse::<Lambda>().is_err());
        assert_eq!("0.5".parse::<Lambda>().unwrap(), lam(1, 2));
    }

    #[test]
    fn energy_examples() {
        let l2 = lam(2, 1);
        let x2 = AlgebraElement::basis(2).unwrap();
        assert_eq!(energy(&x2, &l2).expr, Expr::product(vec![Expr::ratio(1, 4), Expr::var("s1")]));
        let e1 = AlgebraElement::basis(4).unwrap();
        assert_eq!(energy(&e1, &l2).expr, Expr::int(2));
        assert!(energy(&AlgebraElement::basis(1).unwrap(), &l2).expr.is_const_zero());
    }

    #[test]
    fn field_examples() {
        let one = lam(1, 1);
        let f = hamiltonian_field(&AlgebraElement::basis(5).unwrap(), &one);
        assert_eq!(f.constant_values().unwrap(), [integer(-1), integer(0), integer(0), integer(0)]);
        let f = hamiltonian_field(&AlgebraElement::basis(3).unwrap(), &one);
        assert_eq!(f.constant_values().unwrap(), [integer(0), integer(0), integer(0), integer(1)]);
        assert!(hamiltonian_field(&AlgebraElement::basis(4).unwrap(), &one).is_zero());
    }

    #[test]
    fn kirillov_pattern() {
        let k = kirillov_matrix(&lam(3, 1));
        assert_eq!(*k.unit.get(0, 3), integer(-1));
        assert_eq!(*k.unit.get(1, 2), integer(1));
        assert_eq!(*k.form.get(3, 0), integer(3));
        assert!(k.scale_discrepancy);
        assert!(!kirillov_matrix(&lam(1, 1)).scale_discrepancy);
    }

    #[test]
    fn chart_examples() {
        assert_eq!(chart_base(0.0, 0.0, &lam(3, 1)), [3.0, 0.0, 0.0]);
        assert_eq!(chart_base(1.0, 0.0, &lam(1, 1)), [1.0, 1.0, 0.0]);
        assert_eq!(chart_to_functional(&ChartPoint::origin(), &lam(2, 1)), [0.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert_eq!(chart_to_functional(&ChartPoint::new(1.0, 0.0, 0.0, 0.0), &lam(1, 1))[1], 1.0);
    }

    #[test]
    fn classification() {
        use nalgebra::Vector3;
        assert_eq!(classify(&DualFunctional::new(Vector3::zeros(), Vector3::zeros())), OrbitKind::TrivialPoint);
        assert_eq!(
            classify(&DualFunctional::new(Vector3::new(0.0, 3.0, 4.0), Vector3::zeros())),
            OrbitKind::Sphere { radius: 5.0 }
        );
        assert_eq!(
            classify(&DualFunctional::new(Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 0.0, 2.0))),
            OrbitKind::CotangentBundle { radius: 2.0 }
        );
    }

    #[test]
    fn conventions() {
        let all = ChartConvention::all_signed();
        assert_eq!(all.len(), 24);
        assert!(all.iter().any(|c| c.same_assignment(&ChartConvention::polarized())));
        assert_eq!(ChartConvention::by_name("s1=-x2,s2=+x1").unwrap().s1.sign, -1);
        let x1 = AlgebraElement::basis(1).unwrap();
        let e = energy_with(&x1, &lam(1, 2), &ChartConvention::polarized());
        assert_eq!(e.expr, Expr::product(vec![Expr::rational(rational(4, 1)), Expr::var("s2")]));
    }
}
