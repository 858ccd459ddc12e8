use num_traits::Zero;
use serde::Serialize;

use super::{bidiff_normal, moyal_bracket, MoyalError, StarConfig};
use crate::expr::{Expr, Rational, ZeroTest, ZeroTestConfig};
use crate::lie::AlgebraElement;
use crate::orbit::{
    at_origin, energy_coefficients, energy_with, form_on_fields, rank_of_rows, unit_kirillov_matrix, ChartConvention, Lambda,
    SymplecticMatrix,
};

/// A residual expression with its zero-test verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub expr: String,
    #[serde(flatten)]
    pub zero: ZeroTest,
}

impl Residual {
    pub fn of(e: &Expr, cfg: &ZeroTestConfig) -> Self {
        let simplified = e.simplify();
        Self { expr: simplified.to_string(), zero: simplified.is_zero_with(cfg) }
    }

    pub fn is_zero(&self) -> bool {
        self.zero.is_zero
    }
}

/// Covariance residuals for one ordered pair of algebra elements.
#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub u: String,
    pub t: String,
    /// `P^r(Ũ, T̃)` for `r = 2, 3`.
    pub higher_orders: Vec<(usize, Residual)>,
    /// `[Ũ, T̃]_ν − P¹(Ũ, T̃)`.
    pub bracket_minus_poisson: Residual,
    /// `P¹(Ũ, T̃) − ω(ξ_U, ξ_T)`.
    pub poisson_minus_form: Residual,
    /// `P¹(Ũ, T̃) − energy([U, T])` as a function on the chart.
    pub poisson_minus_energy: Residual,
    /// The same residual at the chart origin.
    pub poisson_minus_energy_at_origin: Residual,
}

impl CovarianceReport {
    pub fn all_zero(&self) -> bool {
        self.higher_orders.iter().all(|(_, r)| r.is_zero())
            && self.bracket_minus_poisson.is_zero()
            && self.poisson_minus_form.is_zero()
            && self.poisson_minus_energy.is_zero()
            && self.poisson_minus_energy_at_origin.is_zero()
    }
}

pub fn covariance_report(
    u: &AlgebraElement,
    t: &AlgebraElement,
    lambda: &Lambda,
    w: &SymplecticMatrix,
    conv: &ChartConvention,
    zero_cfg: &ZeroTestConfig,
) -> CovarianceReport {
    let eu = energy_with(u, lambda, conv).expr;
    let et = energy_with(t, lambda, conv).expr;
    let (nu, nt) = (eu.normal_form(), et.normal_form());
    let higher_orders = (2..=3)
        .map(|r| (r, Residual::of(&bidiff_normal(&nu, &nt, r, w).to_expr(), zero_cfg)))
        .collect();
    let p1 = bidiff_normal(&nu, &nt, 1, w).to_expr();
    let cfg = StarConfig::new(w.clone());
    let bracket = moyal_bracket(&eu, &et, &cfg).expr();
    let target = energy_with(&u.bracket(t), lambda, conv).expr;
    let form = form_on_fields(u, t, lambda, conv);
    let c = p1.clone() - target;
    CovarianceReport {
        u: u.to_string(),
        t: t.to_string(),
        higher_orders,
        bracket_minus_poisson: Residual::of(&(bracket - p1.clone()), zero_cfg),
        poisson_minus_form: Residual::of(&(p1 - form), zero_cfg),
        poisson_minus_energy_at_origin: Residual::of(&at_origin(&c), zero_cfg),
        poisson_minus_energy: Residual::of(&c, zero_cfg),
    }
}

/// Outcome of solving for the bivector that makes `P¹(Ũ, T̃)` agree with
/// `energy([U, T])` at the chart origin for every basis pair.
#[derive(Clone, Debug, Serialize)]
pub struct BivectorSolution {
    pub convention: String,
    pub matrix: SymplecticMatrix,
    /// The least-squares solution satisfies every equation.
    pub exact: bool,
    /// Sum of squared equation residuals, exact.
    pub residual_norm_sq: String,
    pub system_rank: usize,
    pub bivector_rank: usize,
    /// `c` with `W = c · (unit Kirillov matrix)`, if proportional.
    pub scale_to_unit: Option<String>,
    /// First permutation `P` and scale `c` with `W = c · P M Pᵀ`.
    pub permutation_to_unit: Option<([usize; 4], String)>,
}

const UPPER: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Exact least squares over the six upper-triangle unknowns, 36 equations.
pub fn solve_bivector(lambda: &Lambda, conv: &ChartConvention) -> Result<BivectorSolution, MoyalError> {
    let basis = AlgebraElement::basis_all();
    let mut rows: Vec<[Rational; 6]> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for u in &basis {
        let (a, _) = energy_coefficients(u, lambda, conv);
        for t in &basis {
            let (b, _) = energy_coefficients(t, lambda, conv);
            let row = UPPER.map(|(i, j)| &a[i] * &b[j] - &a[j] * &b[i]);
            let (_, target) = energy_coefficients(&u.bracket(t), lambda, conv);
            rows.push(row);
            rhs.push(target);
        }
    }
    let normal: Vec<Vec<Rational>> = (0..6)
        .map(|p| (0..6).map(|q| rows.iter().fold(Rational::zero(), |acc, r| acc + &r[p] * &r[q])).collect())
        .collect();
    let proj: Vec<Rational> = (0..6).map(|p| rows.iter().zip(&rhs).fold(Rational::zero(), |acc, (r, c)| acc + &r[p] * c)).collect();
    let system_rank = rank_of_rows(normal.clone());
    if system_rank < 6 {
        return Err(MoyalError::Underdetermined { rank: system_rank });
    }
    let w = solve_square(normal, proj);
    let residual_norm_sq = rows.iter().zip(&rhs).fold(Rational::zero(), |acc, (r, c)| {
        let e = (0..6).fold(Rational::zero(), |s, k| s + &r[k] * &w[k]) - c;
        acc + &e * &e
    });
    let matrix = SymplecticMatrix::from_upper(w.try_into().expect("six unknowns"));
    let unit = unit_kirillov_matrix();
    Ok(BivectorSolution {
        convention: conv.name.clone(),
        exact: residual_norm_sq.is_zero(),
        residual_norm_sq: residual_norm_sq.to_string(),
        system_rank,
        bivector_rank: matrix.rank(),
        scale_to_unit: matrix.proportionality(&unit).map(|c| c.to_string()),
        permutation_to_unit: matrix.relation_to(&unit).map(|(p, c)| (p, c.to_string())),
        matrix,
    })
}

/// Gauss–Jordan on a nonsingular rational system.
fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero()).expect("nonsingular");
        a.swap(col, p);
        b.swap(col, p);
        let pivot = a[col][col].clone();
        for c in col..n {
            a[col][c] = &a[col][c] / &pivot;
        }
        b[col] = &b[col] / &pivot;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n {
                    let sub = &f * &a[col][c];
                    a[r][c] -= sub;
                }
                let sub = &f * &b[col];
                b[r] -= sub;
            }
        }
    }
    b
}
