//! The Lie algebra m(3) with exact rational coefficients, the group M(3) of
//! rigid motions in floating point, and the coadjoint action on m(3)*.

mod algebra;
mod group;

pub use algebra::{AlgebraElement, BASIS_NAMES};
pub use group::{exp_algebra, exp_axis, rotation_about, skew, GroupElement, REORTHONORMALIZE_THRESHOLD};

use nalgebra::Vector3;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("basis index {0} is outside 1..=6")]
    BasisIndex(usize),
    #[error("matrix is not of the form [[skew, v], [0, 0]]")]
    NotInAlgebra,
    #[error("cannot read `{0}` as six comma-separated rationals")]
    Parse(String),
}

/// A functional `F = (μ, α)` on m(3), paired as `⟨F, U⟩ = μ·ω_U + α·v_U`
/// where `ω_U` is the rotation axis of `U` and `v_U` its translation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualFunctional {
    pub mu: [f64; 3],
    pub alpha: [f64; 3],
}

impl DualFunctional {
    pub fn new(mu: Vector3<f64>, alpha: Vector3<f64>) -> Self {
        Self { mu: mu.into(), alpha: alpha.into() }
    }

    pub fn mu_vec(&self) -> Vector3<f64> {
        Vector3::from(self.mu)
    }

    pub fn alpha_vec(&self) -> Vector3<f64> {
        Vector3::from(self.alpha)
    }

    /// From coefficients over the dual basis `(X1*, X2*, X3*, E1*, E2*, E3*)`.
    pub fn from_dual_coefficients(c: &[f64; 6]) -> Self {
        Self { mu: [c[2], c[1], c[0]], alpha: [c[3], c[4], c[5]] }
    }

    pub fn to_dual_coefficients(&self) -> [f64; 6] {
        [self.mu[2], self.mu[1], self.mu[0], self.alpha[0], self.alpha[1], self.alpha[2]]
    }

    pub fn pair(&self, u: &AlgebraElement) -> f64 {
        let c = u.to_f64();
        self.to_dual_coefficients().iter().zip(c).map(|(a, b)| a * b).sum()
    }
}

/// `(Rμ + Rα × r, Rα)`.
pub fn coadjoint(g: &GroupElement, f: &DualFunctional) -> DualFunctional {
    let ra = g.rotation * f.alpha_vec();
    let mu = g.rotation * f.mu_vec() + ra.cross(&g.translation);
    DualFunctional::new(mu, ra)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coadjoint_is_a_left_action() {
        let g = GroupElement::from_factors(Vector3::new(1.0, -0.5, 2.0), 0.3, 1.1, -2.0);
        let h = GroupElement::from_factors(Vector3::new(-0.2, 0.7, 0.1), -1.4, 0.5, 0.9);
        let f = DualFunctional::new(Vector3::new(0.5, -1.0, 2.0), Vector3::new(0.0, 3.0, -1.0));
        let a = coadjoint(&g.mul(&h), &f);
        let b = coadjoint(&g, &coadjoint(&h, &f));
        let d = (a.mu_vec() - b.mu_vec()).norm() + (a.alpha_vec() - b.alpha_vec()).norm();
        assert!(d < 1e-12);
        assert!((a.alpha_vec().norm() - f.alpha_vec().norm()).abs() < 1e-12);
        assert_eq!(coadjoint(&GroupElement::identity(), &f), f);
    }

    #[test]
    fn pairing_uses_rotation_axes() {
        let f = DualFunctional::from_dual_coefficients(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let u = AlgebraElement::from_ints([1, 0, 0, 0, 0, 0]);
        assert_eq!(f.pair(&u), 1.0);
        assert_eq!(f.mu, [3.0, 2.0, 1.0]);
    }
}
