//! Coefficient tower for expressions: exact Gaussian rationals, with a
//! complex-double fallback once anything transcendental enters.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// `re + im·i` with both parts exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::real(Rational::zero())
    }

    pub fn one() -> Self {
        Self::real(Rational::one())
    }

    pub fn i() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.re, -&self.im)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn recip(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(Self::new(&self.re / &norm, -&self.im / &norm))
    }

    pub fn pow(&self, n: i32) -> Option<Self> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            e >>= 1;
        }
        Some(acc)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    /// The value as an integer, if it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.im.is_zero() && self.re.is_integer() {
            Some(self.re.to_integer())
        } else {
            None
        }
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => r.to_f64().unwrap_or(f64::NAN),
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parse `"3"`, `"-1/2"`, `"0.25"`, `"1e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_decimal(n.trim())?;
        let d = parse_decimal(d.trim())?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    parse_decimal(t)
}

/// Exact value of a decimal literal with optional exponent.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let numer: BigInt = digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
    }
    Some(if neg { -value } else { value })
}

/// An expression coefficient: exact where possible, complex double otherwise.
#[derive(Clone, Debug)]
pub enum Coeff {
    Exact(GaussianRational),
    Float(Complex64),
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::Exact(GaussianRational::zero())
    }

    pub fn one() -> Self {
        Coeff::Exact(GaussianRational::one())
    }

    pub fn i() -> Self {
        Coeff::Exact(GaussianRational::i())
    }

    pub fn int(n: i64) -> Self {
        Coeff::Exact(GaussianRational::real(integer(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Coeff::Exact(GaussianRational::real(rational(n, d)))
    }

    pub fn real(r: Rational) -> Self {
        Coeff::Exact(GaussianRational::real(r))
    }

    pub fn gaussian(re: Rational, im: Rational) -> Self {
        Coeff::Exact(GaussianRational::new(re, im))
    }

    pub fn float(re: f64) -> Self {
        Coeff::Float(Complex64::new(re, 0.0))
    }

    pub fn complex(z: Complex64) -> Self {
        Coeff::Float(z)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact(g) => g.is_zero(),
            Coeff::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coeff::Exact(g) => g.re.is_one() && g.im.is_zero(),
            Coeff::Float(z) => z.re == 1.0 && z.im == 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&GaussianRational> {
        match self {
            Coeff::Exact(g) => Some(g),
            Coeff::Float(_) => None,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coeff::Exact(g) => g.to_complex(),
            Coeff::Float(z) => *z,
        }
    }

    fn lift(a: &Coeff, b: &Coeff, exact: impl Fn(&GaussianRational, &GaussianRational) -> GaussianRational, float: impl Fn(Complex64, Complex64) -> Complex64) -> Coeff {
        match (a, b) {
            (Coeff::Exact(x), Coeff::Exact(y)) => Coeff::Exact(exact(x, y)),
            _ => Coeff::Float(float(a.to_complex(), b.to_complex())),
        }
    }

    pub fn add(&self, o: &Coeff) -> Coeff {
        Self::lift(self, o, GaussianRational::add, |x, y| x + y)
    }

    pub fn sub(&self, o: &Coeff) -> Coeff {
        Self::lift(self, o, GaussianRational::sub, |x, y| x - y)
    }

    pub fn mul(&self, o: &Coeff) -> Coeff {
        Self::lift(self, o, GaussianRational::mul, |x, y| x * y)
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Exact(g) => Coeff::Exact(g.neg()),
            Coeff::Float(z) => Coeff::Float(-z),
        }
    }

    pub fn conj(&self) -> Coeff {
        match self {
            Coeff::Exact(g) => Coeff::Exact(g.conj()),
            Coeff::Float(z) => Coeff::Float(z.conj()),
        }
    }

    pub fn recip(&self) -> Option<Coeff> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Coeff::Exact(g) => Coeff::Exact(g.recip()?),
            Coeff::Float(z) => Coeff::Float(z.inv()),
        })
    }

    pub fn div(&self, o: &Coeff) -> Option<Coeff> {
        Some(self.mul(&o.recip()?))
    }

    pub fn pow(&self, n: i32) -> Option<Coeff> {
        match self {
            Coeff::Exact(g) => g.pow(n).map(Coeff::Exact),
            Coeff::Float(z) => {
                if n < 0 && self.is_zero() {
                    None
                } else {
                    Some(Coeff::Float(z.powi(n)))
                }
            }
        }
    }

    /// `e^c`; exact only for `c = 0`.
    pub fn exp(&self) -> Coeff {
        if self.is_zero() {
            Coeff::one()
        } else {
            Coeff::Float(self.to_complex().exp())
        }
    }

    /// Render as a self-delimiting atom that the parser reads back to the same value.
    pub fn to_atom(&self) -> String {
        match self {
            Coeff::Exact(g) => {
                if g.im.is_zero() {
                    rational_atom(&g.re)
                } else if g.re.is_zero() {
                    if g.im.is_one() {
                        "i".to_string()
                    } else {
                        format!("({}*i)", rational_text(&g.im))
                    }
                } else {
                    format!("({} + {}*i)", rational_text(&g.re), rational_atom(&g.im))
                }
            }
            Coeff::Float(z) => {
                if z.im == 0.0 {
                    float_atom(z.re)
                } else if z.re == 0.0 {
                    format!("({:?}*i)", z.im)
                } else {
                    format!("({:?} + {}*i)", z.re, float_atom(z.im))
                }
            }
        }
    }
}

fn rational_text(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rational_atom(r: &Rational) -> String {
    if r.is_integer() && !r.is_negative() {
        r.numer().to_string()
    } else {
        format!("({})", rational_text(r))
    }
}

fn float_atom(x: f64) -> String {
    if x < 0.0 {
        format!("({x:?})")
    } else {
        format!("{x:?}")
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_atom())
    }
}

impl PartialEq for Coeff {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Coeff {}

impl PartialOrd for Coeff {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Coeff {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Coeff::Exact(a), Coeff::Exact(b)) => a.cmp(b),
            (Coeff::Exact(_), Coeff::Float(_)) => Ordering::Less,
            (Coeff::Float(_), Coeff::Exact(_)) => Ordering::Greater,
            (Coeff::Float(a), Coeff::Float(b)) => {
                a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
            }
        }
    }
}

impl From<Rational> for Coeff {
    fn from(r: Rational) -> Self {
        Coeff::real(r)
    }
}

impl From<GaussianRational> for Coeff {
    fn from(g: GaussianRational) -> Self {
        Coeff::Exact(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_decimal("0.25"), Some(rational(1, 4)));
        assert_eq!(parse_decimal("1e-3"), Some(rational(1, 1000)));
        assert_eq!(parse_decimal("-2.5E2"), Some(integer(-250)));
        assert_eq!(parse_decimal(".5"), Some(rational(1, 2)));
        assert_eq!(parse_decimal("abc"), None);
        assert_eq!(parse_rational("3/4"), Some(rational(3, 4)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn gaussian_arithmetic() {
        let a = GaussianRational::new(rational(1, 2), integer(1));
        let inv = a.recip().unwrap();
        assert_eq!(a.mul(&inv), GaussianRational::one());
        assert_eq!(GaussianRational::i().pow(2).unwrap(), GaussianRational::real(integer(-1)));
        assert_eq!(a.pow(-2).unwrap().mul(&a.pow(2).unwrap()), GaussianRational::one());
    }

    #[test]
    fn float_contaminates() {
        let c = Coeff::int(2).mul(&Coeff::float(0.5));
        assert!(!c.is_exact());
        assert_eq!(c.to_complex(), Complex64::new(1.0, 0.0));
        assert!(Coeff::ratio(1, 3).add(&Coeff::ratio(2, 3)).is_one());
    }

    #[test]
    fn atoms_are_parenthesized_when_needed() {
        assert_eq!(Coeff::int(3).to_atom(), "3");
        assert_eq!(Coeff::int(-3).to_atom(), "(-3)");
        assert_eq!(Coeff::ratio(3, 4).to_atom(), "(3/4)");
        assert_eq!(Coeff::i().to_atom(), "i");
        assert_eq!(Coeff::gaussian(integer(1), rational(-1, 2)).to_atom(), "(1 + (-1/2)*i)");
    }
}
