use std::fmt;

use num_traits::{One, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use super::LieError;
use crate::expr::{integer, parse_rational, rational_to_f64, Rational};

/// Basis labels in coefficient order.
pub const BASIS_NAMES: [&str; 6] = ["X1", "X2", "X3", "E1", "E2", "E3"];

/// An element `x1 X1 + x2 X2 + x3 X3 + e1 E1 + e2 E2 + e3 E3` of m(3).
///
/// `X1`, `X2`, `X3` generate rotations about the third, second and first
/// coordinate axes respectively; `Ei` generates translation along axis `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    pub coeffs: [Rational; 6],
}

impl AlgebraElement {
    pub fn new(x: [Rational; 3], e: [Rational; 3]) -> Self {
        let [x1, x2, x3] = x;
        let [e1, e2, e3] = e;
        Self { coeffs: [x1, x2, x3, e1, e2, e3] }
    }

    pub fn from_ints(c: [i64; 6]) -> Self {
        Self { coeffs: c.map(integer) }
    }

    pub fn zero() -> Self {
        Self { coeffs: std::array::from_fn(|_| Rational::zero()) }
    }

    /// Basis element `i` in 1..=6: 1..3 are X1..X3, 4..6 are E1..E3.
    pub fn basis(i: usize) -> Result<Self, LieError> {
        if !(1..=6).contains(&i) {
            return Err(LieError::BasisIndex(i));
        }
        let mut out = Self::zero();
        out.coeffs[i - 1] = Rational::one();
        Ok(out)
    }

    /// All six basis elements in order.
    pub fn basis_all() -> [Self; 6] {
        std::array::from_fn(|k| Self::basis(k + 1).expect("index in range"))
    }

    pub fn x(&self, j: usize) -> &Rational {
        &self.coeffs[j - 1]
    }

    pub fn e(&self, i: usize) -> &Rational {
        &self.coeffs[i + 2]
    }

    /// Axis vector of the rotation part: the skew block acts as `ω × ·`.
    pub fn rotation_axis(&self) -> [Rational; 3] {
        [self.coeffs[2].clone(), self.coeffs[1].clone(), self.coeffs[0].clone()]
    }

    pub fn translation(&self) -> [Rational; 3] {
        [self.coeffs[3].clone(), self.coeffs[4].clone(), self.coeffs[5].clone()]
    }

    fn from_axis(omega: [Rational; 3], v: [Rational; 3]) -> Self {
        let [w1, w2, w3] = omega;
        Self::new([w3, w2, w1], v)
    }

    /// The 4×4 matrix `[[A, v], [0, 0]]` with `A` skew-symmetric.
    pub fn to_matrix(&self) -> [[Rational; 4]; 4] {
        let [w1, w2, w3] = self.rotation_axis();
        let [v1, v2, v3] = self.translation();
        let z = Rational::zero;
        [
            [z(), -w3.clone(), w2.clone(), v1],
            [w3, z(), -w1.clone(), v2],
            [-w2, w1, z(), v3],
            [z(), z(), z(), z()],
        ]
    }

    /// Inverse of [`to_matrix`](Self::to_matrix); rejects matrices outside m(3).
    pub fn from_matrix(m: &[[Rational; 4]; 4]) -> Result<Self, LieError> {
        let skew = (0..3).all(|a| (0..3).all(|b| m[a][b] == -m[b][a].clone()));
        let bottom = m[3].iter().all(Zero::is_zero);
        if !skew || !bottom {
            return Err(LieError::NotInAlgebra);
        }
        let omega = [m[2][1].clone(), m[0][2].clone(), m[1][0].clone()];
        let v = [m[0][3].clone(), m[1][3].clone(), m[2][3].clone()];
        Ok(Self::from_axis(omega, v))
    }

    /// Lie bracket via the semidirect-product formula
    /// `([ω,v],[ω',v']) = (ω×ω', ω×v' − ω'×v)`.
    pub fn bracket(&self, other: &Self) -> Self {
        let w = self.rotation_axis();
        let v = self.translation();
        let w2 = other.rotation_axis();
        let v2 = other.translation();
        let omega = cross(&w, &w2);
        let a = cross(&w, &v2);
        let b = cross(&w2, &v);
        let trans = [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]];
        Self::from_axis(omega, trans)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { coeffs: std::array::from_fn(|k| &self.coeffs[k] + &o.coeffs[k]) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { coeffs: std::array::from_fn(|k| &self.coeffs[k] - &o.coeffs[k]) }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { coeffs: std::array::from_fn(|k| &self.coeffs[k] * c) }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> [f64; 6] {
        std::array::from_fn(|k| rational_to_f64(&self.coeffs[k]))
    }

    /// Parse six comma-separated rationals, e.g. `"0,1,0,1/2,0,0"`.
    pub fn parse(text: &str) -> Result<Self, LieError> {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 6 {
            return Err(LieError::Parse(text.to_string()));
        }
        let mut coeffs = Vec::with_capacity(6);
        for p in parts {
            coeffs.push(parse_rational(p).ok_or_else(|| LieError::Parse(text.to_string()))?);
        }
        Ok(Self { coeffs: coeffs.try_into().expect("six entries") })
    }
}

pub(crate) fn cross(a: &[Rational; 3], b: &[Rational; 3]) -> [Rational; 3] {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, name) in self.coeffs.iter().zip(BASIS_NAMES) {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.is_one() {
                f.write_str(name)?;
            } else {
                write!(f, "({c})*{name}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(6))?;
        for c in &self.coeffs {
            seq.serialize_element(&c.to_string())?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_commutator(a: &[[Rational; 4]; 4], b: &[[Rational; 4]; 4]) -> [[Rational; 4]; 4] {
        let prod = |x: &[[Rational; 4]; 4], y: &[[Rational; 4]; 4]| -> [[Rational; 4]; 4] {
            std::array::from_fn(|i| std::array::from_fn(|j| (0..4).fold(Rational::zero(), |acc, k| acc + &x[i][k] * &y[k][j])))
        };
        let ab = prod(a, b);
        let ba = prod(b, a);
        std::array::from_fn(|i| std::array::from_fn(|j| &ab[i][j] - &ba[i][j]))
    }

    #[test]
    fn basis_matrices() {
        let x1 = AlgebraElement::basis(1).unwrap().to_matrix();
        assert_eq!(x1[0][1], integer(-1));
        assert_eq!(x1[1][0], integer(1));
        let e1 = AlgebraElement::basis(4).unwrap().to_matrix();
        assert_eq!(e1[0][3], integer(1));
        assert!(AlgebraElement::basis(0).is_err());
        assert!(AlgebraElement::basis(7).is_err());
    }

    #[test]
    fn bracket_matches_commutator() {
        let b = AlgebraElement::basis_all();
        for u in &b {
            for t in &b {
                let oracle = AlgebraElement::from_matrix(&mat_commutator(&u.to_matrix(), &t.to_matrix())).unwrap();
                assert_eq!(u.bracket(t), oracle, "[{u}, {t}]");
            }
        }
        assert_eq!(b[0].bracket(&b[1]), b[2].scale(&integer(-1)));
        assert_eq!(b[0].bracket(&b[3]), b[4]);
        assert!(b[3].bracket(&b[4]).is_zero());
    }

    #[test]
    fn matrix_round_trip_and_parse() {
        let u = AlgebraElement::parse("1, -2, 1/3, 0, 5/2, -1").unwrap();
        assert_eq!(AlgebraElement::from_matrix(&u.to_matrix()).unwrap(), u);
        assert!(AlgebraElement::parse("1,2").is_err());
        assert_eq!(serde_json::to_string(&u).unwrap(), r#"["1","-2","1/3","0","5/2","-1"]"#);
    }
}
