use num_traits::Zero;

use crate::expr::{Coeff, Expr, Rational};
use crate::lie::AlgebraElement;
use crate::moyal::{poisson, star, MaxOrder, StarConfig};
use crate::orbit::{energy_with, ChartConvention, Lambda};

/// Variables of partially Fourier-transformed chart functions.
pub const LHAT_VARS: [&str; 4] = ["eta1", "eta2", "t1", "t2"];

/// `l_U f = (1/2ν) Ũ ⋆ f`. Exact because `Ũ` is linear.
pub fn l_left(u: &AlgebraElement, f: &Expr, lambda: &Lambda, conv: &ChartConvention, cfg: &StarConfig) -> Expr {
    let e = energy_with(u, lambda, conv).expr;
    let cfg = cfg.clone().with_max_order(MaxOrder::Fixed(1));
    let inv = cfg.nu().mul(&Coeff::int(2)).recip().expect("hbar is nonzero");
    star(&e, f, &cfg).value.scale(&inv).to_expr()
}

/// `[l_U, l_T] f`.
pub fn left_commutator(
    u: &AlgebraElement,
    t: &AlgebraElement,
    f: &Expr,
    lambda: &Lambda,
    conv: &ChartConvention,
    cfg: &StarConfig,
) -> Expr {
    let l = |a: &AlgebraElement, g: &Expr| l_left(a, g, lambda, conv, cfg);
    l(u, &l(t, f)) - l(t, &l(u, f))
}

/// `(1/2ν) P¹(Ũ, T̃) f`, which `[l_U, l_T] f` always equals for linear energies.
pub fn commutator_prediction(
    u: &AlgebraElement,
    t: &AlgebraElement,
    f: &Expr,
    lambda: &Lambda,
    conv: &ChartConvention,
    cfg: &StarConfig,
) -> Expr {
    let (eu, et) = (energy_with(u, lambda, conv).expr, energy_with(t, lambda, conv).expr);
    let inv = cfg.nu().mul(&Coeff::int(2)).recip().expect("hbar is nonzero");
    Expr::Const(inv) * poisson(&eu, &et, &cfg.bivector) * f.clone()
}

/// `l̂_U = iλ(e1 + e2 u + e3 v) + x3 ∂_u − x2 ∂_v` written in `(η, t)` with
/// `u = λt1 − λ²η2/2`, `v = λt2 + λ²η1/2`,
/// `∂_u = (1/2λ)∂_t1 − (1/λ²)∂_η2`, `∂_v = (1/2λ)∂_t2 + (1/λ²)∂_η1`.
#[derive(Clone, Debug)]
pub struct LhatOperator {
    pub multiplier: Expr,
    /// `(variable, coefficient)` pairs of the first-order part.
    pub derivatives: Vec<(&'static str, Rational)>,
}

impl LhatOperator {
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut terms = vec![self.multiplier.clone() * f.clone()];
        for (v, c) in &self.derivatives {
            terms.push(Expr::rational(c.clone()) * f.differentiate(v));
        }
        Expr::sum(terms)
    }

    pub fn is_zero(&self) -> bool {
        self.multiplier.is_const_zero() && self.derivatives.is_empty()
    }
}

/// The `u` and `v` coordinates as expressions in `(η, t)`.
pub fn uv_coordinates(lambda: &Lambda) -> (Expr, Expr) {
    let l = lambda.expr();
    let half_l2 = Expr::rational(lambda.squared() / Rational::from_integer(2.into()));
    let u = l.clone() * Expr::var("t1") - half_l2.clone() * Expr::var("eta2");
    let v = l * Expr::var("t2") + half_l2 * Expr::var("eta1");
    (u, v)
}

pub fn lhat_formula(u: &AlgebraElement, lambda: &Lambda) -> LhatOperator {
    let (uu, vv) = uv_coordinates(lambda);
    let e = |k| Expr::rational(u.e(k).clone());
    let mult = Expr::sum(vec![e(1), e(2) * uu, e(3) * vv]);
    let multiplier = (Expr::i() * lambda.expr() * mult).simplify();
    let two_l = lambda.value() * Rational::from_integer(2.into());
    let l2 = lambda.squared();
    let (x2, x3) = (u.x(2).clone(), u.x(3).clone());
    let candidates = [
        ("t1", &x3 / &two_l),
        ("eta2", -(&x3 / &l2)),
        ("t2", -(&x2 / &two_l)),
        ("eta1", -(&x2 / &l2)),
    ];
    let derivatives = candidates.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    LhatOperator { multiplier, derivatives }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::orbit::kirillov_matrix;

    fn lam(n: i64, d: i64) -> Lambda {
        Lambda::from_ratio(n, d).unwrap()
    }

    #[test]
    fn formula_examples() {
        let l = lam(3, 2);
        let e1 = lhat_formula(&AlgebraElement::basis(4).unwrap(), &l);
        assert!(e1.derivatives.is_empty());
        assert!((e1.multiplier.clone() - parse("3/2*i").unwrap()).is_zero().is_zero);
        assert!(lhat_formula(&AlgebraElement::basis(1).unwrap(), &l).is_zero());
        // X2 gives −∂_v.
        let x2 = lhat_formula(&AlgebraElement::basis(2).unwrap(), &l);
        let (_, v) = uv_coordinates(&l);
        assert!((x2.apply(&v) + Expr::one()).is_zero().is_zero);
        let (u, _) = uv_coordinates(&l);
        assert!(x2.apply(&u).is_zero().is_zero);
    }

    #[test]
    fn commutator_is_the_poisson_constant() {
        let l = lam(1, 2);
        let conv = ChartConvention::literal();
        let cfg = StarConfig::new(kirillov_matrix(&l).form);
        let f = parse("s1^2*t2 + exp(i*s2) + t1").unwrap();
        let basis = AlgebraElement::basis_all();
        for u in &basis {
            for t in &basis {
                let lhs = left_commutator(u, t, &f, &l, &conv, &cfg);
                let rhs = commutator_prediction(u, t, &f, &l, &conv, &cfg);
                assert!((lhs - rhs).is_zero().is_zero, "{u} {t}");
            }
        }
        assert!(l_left(&AlgebraElement::zero(), &f, &l, &conv, &cfg).is_zero().is_zero);
    }
}
