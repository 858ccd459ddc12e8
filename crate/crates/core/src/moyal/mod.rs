//! Moyal star product on chart functions with a constant bivector.
//!
//! `f ⋆ g = fg + Σ_r ν^r/r! P^r(f, g)` with `ν = ħ/(2i)` and
//! `P^r(f, g) = Σ W^{i1 j1}⋯W^{ir jr} ∂_{i1⋯ir} f ∂_{j1⋯jr} g`.

mod covariance;
mod registry;

pub use covariance::{covariance_report, solve_bivector, BivectorSolution, CovarianceReport, Residual};
pub use registry::{BivectorRegistry, BivectorSource, FormBivector, SolvedBivector, UnitBivector};

use std::collections::HashMap;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{integer, Coeff, Expr, GaussianRational, NormalForm, Rational};
use crate::orbit::{SymplecticMatrix, CHART_VARS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoyalError {
    #[error("bidifferential order must be at least 1, got {0}")]
    NonPositiveOrder(i64),
    #[error("unknown bivector `{0}`; known: {1}")]
    UnknownBivector(String, String),
    #[error("covariance system is underdetermined (rank {rank} of 6)")]
    Underdetermined { rank: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxOrder {
    /// Stop where the series terminates for polynomial arguments; otherwise
    /// truncate at `fallback` and flag the result as inexact.
    ExactByDegree { fallback: usize },
    /// Always sum exactly this many correction terms.
    Fixed(usize),
}

#[derive(Clone, Debug)]
pub struct StarConfig {
    pub hbar: Rational,
    pub bivector: SymplecticMatrix,
    pub max_order: MaxOrder,
}

impl StarConfig {
    pub fn new(bivector: SymplecticMatrix) -> Self {
        Self { hbar: integer(1), bivector, max_order: MaxOrder::ExactByDegree { fallback: 8 } }
    }

    pub fn with_hbar(mut self, hbar: Rational) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn with_max_order(mut self, max_order: MaxOrder) -> Self {
        self.max_order = max_order;
        self
    }

    /// `ν = ħ/(2i) = −iħ/2`, exactly.
    pub fn nu(&self) -> Coeff {
        Coeff::Exact(GaussianRational::new(Rational::zero(), -&self.hbar / integer(2)))
    }
}

/// Nonzero bivector entries as `(i, j, W[i][j])`.
fn support(w: &SymplecticMatrix) -> Vec<(usize, usize, Coeff)> {
    let mut out = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let v = w.get(i, j);
            if !v.is_zero() {
                out.push((i, j, Coeff::real(v.clone())));
            }
        }
    }
    out
}

/// Memoized partial derivatives keyed by per-variable counts.
struct DerivativeCache {
    base: NormalForm,
    memo: HashMap<[u8; 4], NormalForm>,
    live: [bool; 4],
}

impl DerivativeCache {
    fn new(base: NormalForm) -> Self {
        let live = CHART_VARS.map(|v| base.depends_on(v));
        Self { base, memo: HashMap::new(), live }
    }

    fn get(&mut self, counts: [u8; 4]) -> NormalForm {
        if counts.iter().zip(self.live).any(|(c, l)| *c > 0 && !l) {
            return NormalForm::zero();
        }
        if counts == [0; 4] {
            return self.base.clone();
        }
        if let Some(d) = self.memo.get(&counts) {
            return d.clone();
        }
        let k = counts.iter().rposition(|c| *c > 0).expect("nonzero counts");
        let mut lower = counts;
        lower[k] -= 1;
        let prev = self.get(lower);
        let d = prev.derivative(CHART_VARS[k]);
        self.memo.insert(counts, d.clone());
        d
    }
}

/// Every multiset of size `r` drawn from `n` kinds, as multiplicity vectors.
fn multisets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, r: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k + 1 == n {
            cur.push(r);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for m in (0..=r).rev() {
            cur.push(m);
            go(n, r - m, k + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if r == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(n, r, 0, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(integer(1), |acc, k| acc * integer(k))
}

fn bidiff_cached(fc: &mut DerivativeCache, gc: &mut DerivativeCache, r: usize, sup: &[(usize, usize, Coeff)]) -> NormalForm {
    let mut total = NormalForm::zero();
    let r_fact = factorial(r);
    for mult in multisets(sup.len(), r) {
        let mut weight = Coeff::real(r_fact.clone());
        let mut fi = [0u8; 4];
        let mut gj = [0u8; 4];
        for ((i, j, w), m) in sup.iter().zip(&mult) {
            if *m == 0 {
                continue;
            }
            weight = weight.mul(&w.pow(*m as i32).expect("nonzero entry")).mul(&Coeff::real(factorial(*m).recip()));
            fi[*i] += *m as u8;
            gj[*j] += *m as u8;
        }
        let df = fc.get(fi);
        if df.is_zero() {
            continue;
        }
        let dg = gc.get(gj);
        if dg.is_zero() {
            continue;
        }
        total = total.add(&df.mul(&dg).scale(&weight));
    }
    total
}

/// `P^r(f, g)` on normal forms.
pub fn bidiff_normal(f: &NormalForm, g: &NormalForm, r: usize, w: &SymplecticMatrix) -> NormalForm {
    let sup = support(w);
    let mut fc = DerivativeCache::new(f.clone());
    let mut gc = DerivativeCache::new(g.clone());
    bidiff_cached(&mut fc, &mut gc, r, &sup)
}

/// `P^r(f, g)`, collected into canonical form.
pub fn bidiff(f: &Expr, g: &Expr, r: i64, w: &SymplecticMatrix) -> Result<Expr, MoyalError> {
    if r < 1 {
        return Err(MoyalError::NonPositiveOrder(r));
    }
    Ok(bidiff_normal(&f.normal_form(), &g.normal_form(), r as usize, w).to_expr())
}

/// `P¹(f, g) = Σ W^{ij} ∂_i f ∂_j g`, the Poisson bracket of the bivector.
pub fn poisson(f: &Expr, g: &Expr, w: &SymplecticMatrix) -> Expr {
    bidiff_normal(&f.normal_form(), &g.normal_form(), 1, w).to_expr()
}

#[derive(Clone, Debug)]
pub struct StarProduct {
    pub value: NormalForm,
    /// Number of correction terms summed.
    pub order: usize,
    /// False when the series was cut off before it terminates.
    pub exact: bool,
    /// `P^1, …, P^order` in order.
    pub corrections: Vec<NormalForm>,
}

impl StarProduct {
    pub fn expr(&self) -> Expr {
        self.value.to_expr()
    }
}

/// Number of terms to sum and whether that is the whole series.
fn effective_order(f: &NormalForm, g: &NormalForm, max: MaxOrder) -> (usize, bool) {
    let df = f.degree_in(&CHART_VARS);
    let dg = g.degree_in(&CHART_VARS);
    let terminates = match (df, dg) {
        (Some(a), Some(b)) => Some(a.min(b) as usize),
        (Some(a), None) | (None, Some(a)) => Some(a as usize),
        (None, None) => None,
    };
    match (max, terminates) {
        (MaxOrder::ExactByDegree { .. }, Some(n)) => (n, true),
        (MaxOrder::ExactByDegree { fallback }, None) => (fallback, false),
        (MaxOrder::Fixed(n), Some(m)) => (n.min(m), n >= m),
        (MaxOrder::Fixed(n), None) => (n, false),
    }
}

pub fn star_normal(f: &NormalForm, g: &NormalForm, cfg: &StarConfig) -> StarProduct {
    let (order, exact) = effective_order(f, g, cfg.max_order);
    let sup = support(&cfg.bivector);
    let mut fc = DerivativeCache::new(f.clone());
    let mut gc = DerivativeCache::new(g.clone());
    let nu = cfg.nu();
    let mut value = f.mul(g);
    let mut corrections = Vec::with_capacity(order);
    let mut coeff = Coeff::one();
    for r in 1..=order {
        coeff = coeff.mul(&nu).mul(&Coeff::ratio(1, r as i64));
        let p = bidiff_cached(&mut fc, &mut gc, r, &sup);
        value = value.add(&p.scale(&coeff));
        corrections.push(p);
    }
    StarProduct { value, order, exact, corrections }
}

pub fn star(f: &Expr, g: &Expr, cfg: &StarConfig) -> StarProduct {
    star_normal(&f.normal_form(), &g.normal_form(), cfg)
}

#[derive(Clone, Debug)]
pub struct Bracket {
    pub value: NormalForm,
    pub exact: bool,
}

impl Bracket {
    pub fn expr(&self) -> Expr {
        self.value.to_expr()
    }
}

/// `[f, g]_ν = (f⋆g − g⋆f)/(2ν)`.
pub fn moyal_bracket(f: &Expr, g: &Expr, cfg: &StarConfig) -> Bracket {
    let (nf, ng) = (f.normal_form(), g.normal_form());
    let a = star_normal(&nf, &ng, cfg);
    let b = star_normal(&ng, &nf, cfg);
    let two_nu = cfg.nu().mul(&Coeff::int(2));
    let inv = two_nu.recip().expect("hbar is nonzero");
    Bracket { value: a.value.sub(&b.value).scale(&inv), exact: a.exact && b.exact }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::orbit::unit_kirillov_matrix;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    /// Direct enumeration of all `4^(2r)` index tuples.
    fn brute_bidiff(f: &Expr, g: &Expr, r: usize, w: &SymplecticMatrix) -> Expr {
        let mut terms = Vec::new();
        let n = 4usize.pow(2 * r as u32);
        for code in 0..n {
            let mut c = code;
            let mut is = Vec::new();
            let mut js = Vec::new();
            let mut weight = integer(1);
            for _ in 0..r {
                let i = c % 4;
                c /= 4;
                let j = c % 4;
                c /= 4;
                weight *= w.get(i, j).clone();
                is.push(CHART_VARS[i]);
                js.push(CHART_VARS[j]);
            }
            if weight.is_zero() {
                continue;
            }
            terms.push(Expr::rational(weight) * f.differentiate_many(&is) * g.differentiate_many(&js));
        }
        Expr::sum(terms)
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(4, 2).len(), 10);
        assert_eq!(multisets(1, 3), vec![vec![3]]);
        assert_eq!(multisets(3, 0), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn bidiff_matches_enumeration() {
        let w = unit_kirillov_matrix();
        let f = p("s1^2*t2 + 3*s2*t1^2 - s1*s2*t2 + exp(i*t1)");
        let g = p("t2^2*s1 + s2^3 - 2*t1*s1 + exp(2*s2)");
        for r in 1..=3 {
            let fast = bidiff(&f, &g, r as i64, &w).unwrap();
            let slow = brute_bidiff(&f, &g, r, &w);
            assert!((fast - slow).is_zero().is_zero, "order {r}");
        }
        assert_eq!(bidiff(&p("s1"), &p("t2"), 1, &w).unwrap(), Expr::int(-1));
        assert!(bidiff(&f, &g, 0, &w).is_err());
    }

    #[test]
    fn star_basics() {
        let cfg = StarConfig::new(unit_kirillov_matrix());
        let g = p("s1^2*t1 + exp(i*s2)");
        let one = star(&Expr::one(), &g, &cfg);
        assert!(one.exact && one.order == 0);
        assert!((one.expr() - g.clone()).is_zero().is_zero);
        let lin = star(&p("s1 + 2*t2"), &g, &cfg);
        assert!(lin.exact && lin.order == 1);
        let s = star(&p("exp(s1)"), &p("exp(t2)"), &cfg);
        assert!(!s.exact);
        assert_eq!(s.order, 8);
    }

    #[test]
    fn associativity_on_quadratics() {
        let cfg = StarConfig::new(unit_kirillov_matrix().scale(&integer(3)));
        let (f, g, h) = (p("s1*t1 + s2^2"), p("t2*s1 - t1^2 + 1"), p("s2*t2 + s1^2*(1/2)"));
        let fg = star(&f, &g, &cfg).expr();
        let gh = star(&g, &h, &cfg).expr();
        let left = star(&fg, &h, &cfg);
        let right = star(&f, &gh, &cfg);
        assert!(left.exact && right.exact);
        assert_eq!(left.value, right.value);
    }

    #[test]
    fn bracket_of_linear_is_poisson() {
        let cfg = StarConfig::new(unit_kirillov_matrix());
        let (f, g) = (p("s1 + t1"), p("2*t2 - s2"));
        let b = moyal_bracket(&f, &g, &cfg);
        assert_eq!(b.value, poisson(&f, &g, &cfg.bivector).normal_form());
        assert!(moyal_bracket(&f, &f, &cfg).value.is_zero());
    }
}
