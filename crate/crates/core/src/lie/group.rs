use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Serialize, Serializer};

use super::AlgebraElement;

/// Drift threshold on `‖RᵀR − I‖` beyond which products re-project onto SO(3).
pub const REORTHONORMALIZE_THRESHOLD: f64 = 1e-10;

/// A rigid motion `σ ↦ Rσ + r`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }.reorthonormalized()
    }

    pub fn translation_only(r: Vector3<f64>) -> Self {
        Self { rotation: Matrix3::identity(), translation: r }
    }

    pub fn rotation_only(rotation: Matrix3<f64>) -> Self {
        Self { rotation, translation: Vector3::zeros() }
    }

    /// `exp(r·E) exp(θ1 X1) exp(θ2 X2) exp(θ3 X3)`.
    pub fn from_factors(r: Vector3<f64>, theta1: f64, theta2: f64, theta3: f64) -> Self {
        let rot = rotation_about(2, theta1) * rotation_about(1, theta2) * rotation_about(0, theta3);
        Self { rotation: rot, translation: r }
    }

    /// Recover `(r, θ1, θ2, θ3)` with `θ2 ∈ [−π/2, π/2]`.
    pub fn to_factors(&self) -> (Vector3<f64>, f64, f64, f64) {
        let m = &self.rotation;
        let theta1 = m[(1, 0)].atan2(m[(0, 0)]);
        let theta2 = (-m[(2, 0)]).atan2((m[(0, 0)].powi(2) + m[(1, 0)].powi(2)).sqrt());
        let theta3 = m[(2, 1)].atan2(m[(2, 2)]);
        (self.translation, theta1, theta2, theta3)
    }

    pub fn mul(&self, h: &Self) -> Self {
        Self {
            rotation: self.rotation * h.rotation,
            translation: self.rotation * h.translation + self.translation,
        }
        .reorthonormalized()
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self { rotation: rt, translation: -(rt * self.translation) }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// `‖RᵀR − I‖_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).norm()
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.orthogonality_defect() <= tol && (self.rotation.determinant() - 1.0).abs() <= tol
    }

    /// Polar projection back onto SO(3) when drift exceeds the threshold.
    pub fn reorthonormalized(mut self) -> Self {
        if self.orthogonality_defect() > REORTHONORMALIZE_THRESHOLD {
            let svd = self.rotation.svd(true, true);
            let (u, vt) = (svd.u.expect("requested u"), svd.v_t.expect("requested v_t"));
            self.rotation = u * vt;
        }
        self
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.rotation - other.rotation).norm() + (self.translation - other.translation).norm()
    }
}

/// Rotation by `theta` about coordinate axis `axis` (0-based), right-handed.
pub fn rotation_about(axis: usize, theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    match axis {
        0 => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        1 => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        2 => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        _ => panic!("axis index {axis} out of range"),
    }
}

/// `σ ↦ ω × σ`.
pub fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Matrix exponential of the 4×4 form of `u`: Rodrigues for the rotation
/// block, and `Σ Aᵏ v / (k+1)!` for the translation.
pub fn exp_algebra(u: &AlgebraElement) -> GroupElement {
    let c = u.to_f64();
    exp_axis(&Vector3::new(c[2], c[1], c[0]), &Vector3::new(c[3], c[4], c[5]))
}

/// Exponential of the element with rotation axis `w` and translation `v`.
pub fn exp_axis(w: &Vector3<f64>, v: &Vector3<f64>) -> GroupElement {
    let a = skew(w);
    let theta = w.norm();
    let rotation = if theta == 0.0 {
        Matrix3::identity()
    } else {
        let k = a / theta;
        Matrix3::identity() + k * theta.sin() + k * k * (1.0 - theta.cos())
    };
    let mut term = *v;
    let mut translation = *v;
    for k in 1..200 {
        term = a * term / (k as f64 + 1.0);
        translation += term;
        if term.norm() <= f64::EPSILON * translation.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    GroupElement { rotation, translation }
}

impl Serialize for GroupElement {
    /// Row-major homogeneous 4×4 matrix.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m = self.to_homogeneous();
        let rows: Vec<[f64; 4]> = (0..4).map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)], m[(i, 3)]]).collect();
        rows.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rational;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn exp_matches_pade_exponential() {
        let u = AlgebraElement::new(
            [rational(3, 2), rational(-1, 3), rational(2, 1)],
            [rational(1, 1), rational(-2, 1), rational(1, 2)],
        );
        let g = exp_algebra(&u);
        let m = u.to_matrix();
        let mf = Matrix4::from_fn(|i, j| crate::expr::rational_to_f64(&m[i][j]));
        let oracle = mf.exp();
        assert!((g.to_homogeneous() - oracle).norm() < 1e-12);
    }

    #[test]
    fn factor_conventions() {
        let g = GroupElement::from_factors(Vector3::zeros(), FRAC_PI_2, 0.0, 0.0);
        let e1 = g.apply(&Vector3::x());
        assert!((e1 - Vector3::y()).norm() < 1e-15);
        let x1 = exp_algebra(&AlgebraElement::basis(1).unwrap());
        assert!((x1.rotation - rotation_about(2, 1.0)).norm() < 1e-15);
        let h = GroupElement::from_factors(Vector3::new(1.0, 2.0, 3.0), 0.4, -0.9, 2.1);
        let (r, a, b, c) = h.to_factors();
        assert!((r - Vector3::new(1.0, 2.0, 3.0)).norm() < 1e-15);
        assert!((a - 0.4).abs() < 1e-13 && (b + 0.9).abs() < 1e-13 && (c - 2.1).abs() < 1e-13);
    }

    #[test]
    fn group_law() {
        let g = GroupElement::from_factors(Vector3::new(0.3, -1.0, 2.0), 1.0, 0.2, -0.7);
        let id = g.mul(&g.inverse());
        assert!(id.distance(&GroupElement::identity()) < 1e-14);
        let t = GroupElement::translation_only(Vector3::new(1.0, 0.0, 0.0))
            .mul(&GroupElement::translation_only(Vector3::new(0.0, 2.0, 0.0)));
        assert_eq!(t.translation, Vector3::new(1.0, 2.0, 0.0));
        assert!((g.to_homogeneous() * g.inverse().to_homogeneous() - Matrix4::identity()).norm() < 1e-14);
    }

    #[test]
    fn drift_is_projected_away() {
        let mut g = GroupElement::identity();
        g.rotation[(0, 1)] = 1e-6;
        let h = g.reorthonormalized();
        assert!(h.orthogonality_defect() < 1e-14);
        assert!(h.is_valid(1e-12));
    }
}
