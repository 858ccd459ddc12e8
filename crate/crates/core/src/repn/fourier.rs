//! Partial Fourier transform in the fiber variables on a uniform grid:
//! `(F f)(η) = (1/2π) ∫ e^{−i s·η} f(s) ds`.
//!
//! Grid: `s_k = −L + kΔs`, `Δs = 2L/N`; `η_m = (m − N/2)Δη`, `Δη = π/L`.
//! Then `e^{−i s_k η_m} = (−1)^{k+m+N/2} e^{−2πikm/N}`, so both directions are
//! a sign-twisted FFT. Samples are row-major with the first variable slow.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::lhat::{lhat_formula, LHAT_VARS};
use super::RepnError;
use crate::expr::{rational_to_f64, Expr};
use crate::lie::AlgebraElement;
use crate::orbit::{energy_coefficients, ChartConvention, Lambda, SymplecticMatrix};

/// Boundary-to-peak ratio above which a sampled function is rejected.
pub const ALIASING_LIMIT: f64 = 1e-12;

#[derive(Clone)]
pub struct FourierGrid {
    pub extent: f64,
    pub n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid").field("extent", &self.extent).field("n", &self.n).finish()
    }
}

impl FourierGrid {
    pub fn new(extent: f64, n: usize) -> Result<Self, RepnError> {
        if n < 16 || !n.is_power_of_two() {
            return Err(RepnError::BadGrid(format!("N must be a power of two >= 16, got {n}")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(RepnError::BadGrid(format!("extent must be positive, got {extent}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self { extent, n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) })
    }

    pub fn ds(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn deta(&self) -> f64 {
        std::f64::consts::PI / self.extent
    }

    pub fn s(&self, k: usize) -> f64 {
        -self.extent + k as f64 * self.ds()
    }

    pub fn eta(&self, m: usize) -> f64 {
        (m as f64 - (self.n / 2) as f64) * self.deta()
    }

    /// Sample `f(x1, x2)` at the grid points produced by `coord`.
    fn sample(&self, coord: impl Fn(usize) -> f64 + Sync, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Vec<Complex64> {
        let n = self.n;
        (0..n * n).into_par_iter().map(|idx| f(coord(idx / n), coord(idx % n))).collect()
    }

    pub fn sample_s(&self, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Vec<Complex64> {
        self.sample(|k| self.s(k), f)
    }

    pub fn sample_eta(&self, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Vec<Complex64> {
        self.sample(|m| self.eta(m), f)
    }

    fn fft2(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        data.par_chunks_mut(n).for_each(|row| plan.process(row));
        let mut t = transpose(data, n);
        t.par_chunks_mut(n).for_each(|row| plan.process(row));
        data.copy_from_slice(&transpose(&t, n));
    }

    /// `s`-grid samples to `η`-grid samples.
    pub fn forward(&self, f: &[Complex64]) -> Vec<Complex64> {
        let scale = self.ds() * self.ds() / (2.0 * std::f64::consts::PI);
        self.twisted(f, &self.forward, scale)
    }

    /// `η`-grid samples to `s`-grid samples.
    pub fn inverse(&self, g: &[Complex64]) -> Vec<Complex64> {
        let scale = self.deta() * self.deta() / (2.0 * std::f64::consts::PI);
        self.twisted(g, &self.inverse, scale)
    }

    fn twisted(&self, x: &[Complex64], plan: &Arc<dyn Fft<f64>>, scale: f64) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(x.len(), n * n, "sample count must be N²");
        // The per-axis (−1)^{N/2} factors cancel in two dimensions.
        let sign = |idx: usize| if (idx / n + idx % n) % 2 == 0 { 1.0 } else { -1.0 };
        let mut data: Vec<Complex64> = x.iter().enumerate().map(|(i, v)| v * sign(i)).collect();
        self.fft2(&mut data, plan);
        data.iter_mut().enumerate().for_each(|(i, v)| *v *= sign(i) * scale);
        data
    }

    /// `‖f‖₂` with the `s`-grid cell area.
    pub fn norm_s(&self, f: &[Complex64]) -> f64 {
        sum_sq(f).sqrt() * self.ds()
    }

    /// `‖g‖₂` with the `η`-grid cell area.
    pub fn norm_eta(&self, g: &[Complex64]) -> f64 {
        sum_sq(g).sqrt() * self.deta()
    }

    /// Largest boundary magnitude over the largest magnitude.
    pub fn boundary_ratio(&self, f: &[Complex64]) -> f64 {
        let n = self.n;
        let sup = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if sup == 0.0 {
            return 0.0;
        }
        let edge = (0..n * n)
            .filter(|&i| {
                let (a, b) = (i / n, i % n);
                a == 0 || b == 0 || a == n - 1 || b == n - 1
            })
            .map(|i| f[i].norm())
            .fold(0.0, f64::max);
        edge / sup
    }

    /// Reject samples that have not decayed at the boundary.
    pub fn guard(&self, f: &[Complex64]) -> Result<f64, RepnError> {
        let r = self.boundary_ratio(f);
        if r > ALIASING_LIMIT {
            Err(RepnError::Aliasing { ratio: r, limit: ALIASING_LIMIT })
        } else {
            Ok(r)
        }
    }
}

fn sum_sq(f: &[Complex64]) -> f64 {
    f.iter().map(|v| v.norm_sqr()).sum()
}

fn transpose(d: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = d[i * n + j];
        }
    }
    out
}

/// Fiber positions sampled by the conjugation check.
pub const T_SAMPLES: [[f64; 2]; 3] = [[0.0, 0.0], [0.3, -0.7], [-1.1, 0.5]];

#[derive(Clone, Debug, Serialize)]
pub struct ConjugationResidual {
    /// `‖l̂_U f − F l_U F⁻¹ f‖ / ‖f‖`, pooled over the fiber samples.
    pub residual: f64,
    /// Worst boundary ratio seen by the aliasing guard.
    pub boundary_ratio: f64,
}

/// Samples of one conjugation comparison on the `η`-grid.
#[derive(Clone, Debug)]
pub struct ConjugationFields {
    pub input: Vec<Complex64>,
    /// `F l_U F⁻¹ f`.
    pub conjugated: Vec<Complex64>,
    /// `l̂_U f` from the closed form.
    pub formula: Vec<Complex64>,
    pub boundary_ratio: f64,
}

/// Both sides of `l̂_U f = F l_U F⁻¹ f` at one fiber position, where `l_U`
/// acts through the energy of `conv` and the bivector `w` (ħ = 1).
pub fn conjugation_fields(
    u: &AlgebraElement,
    lambda: &Lambda,
    testf: &Expr,
    grid: &FourierGrid,
    conv: &ChartConvention,
    w: &SymplecticMatrix,
    t: [f64; 2],
) -> Result<ConjugationFields, RepnError> {
    let ev = |e: &Expr| e.evaluator(&LHAT_VARS).map_err(|e| RepnError::Expression(e.to_string()));
    let f_eval = ev(testf)?;
    let dt = [ev(&testf.differentiate("t1"))?, ev(&testf.differentiate("t2"))?];
    let closed = ev(&lhat_formula(u, lambda).apply(testf))?;

    let (lin, constant) = energy_coefficients(u, lambda, conv);
    let a: Vec<f64> = lin.iter().map(rational_to_f64).collect();
    let c0 = rational_to_f64(&constant);
    let wf = w.to_f64();
    // P¹(Ũ, g) = Σ_j c_j ∂_j g
    let c: Vec<f64> = (0..4).map(|j| (0..4).map(|i| a[i] * wf[i][j]).sum()).collect();

    let i = Complex64::i();
    let [t1, t2] = t;
    let at = |e: &crate::expr::Evaluator| grid.sample_eta(|h1, h2| e.eval(&[h1, h2, t1, t2]));
    let input = at(&f_eval);
    let mut worst = grid.guard(&input)?;
    let g = grid.inverse(&input);
    worst = worst.max(grid.guard(&g)?);
    // ∂_s acts as multiplication by iη before the inverse transform.
    let ds1 = grid.inverse(&grid.sample_eta(|h1, h2| i * h1 * f_eval.eval(&[h1, h2, t1, t2])));
    let ds2 = grid.inverse(&grid.sample_eta(|h1, h2| i * h2 * f_eval.eval(&[h1, h2, t1, t2])));
    let dt1 = grid.inverse(&at(&dt[0]));
    let dt2 = grid.inverse(&at(&dt[1]));
    let n = grid.n;
    let lg: Vec<Complex64> = (0..n * n)
        .map(|idx| {
            let (s1, s2) = (grid.s(idx / n), grid.s(idx % n));
            let energy = a[0] * s1 + a[1] * s2 + a[2] * t1 + a[3] * t2 + c0;
            let p1 = c[0] * ds1[idx] + c[1] * ds2[idx] + c[2] * dt1[idx] + c[3] * dt2[idx];
            i * energy * g[idx] + p1 * 0.5
        })
        .collect();
    Ok(ConjugationFields { conjugated: grid.forward(&lg), formula: at(&closed), input, boundary_ratio: worst })
}

/// Compare the closed-form `l̂_U` with `F ∘ l_U ∘ F⁻¹` over [`T_SAMPLES`].
pub fn conjugation_check(
    u: &AlgebraElement,
    lambda: &Lambda,
    testf: &Expr,
    grid: &FourierGrid,
    conv: &ChartConvention,
    w: &SymplecticMatrix,
) -> Result<ConjugationResidual, RepnError> {
    let (mut num, mut den, mut worst) = (0.0, 0.0, 0.0f64);
    for t in T_SAMPLES {
        let f = conjugation_fields(u, lambda, testf, grid, conv, w, t)?;
        worst = worst.max(f.boundary_ratio);
        num += f.conjugated.iter().zip(&f.formula).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>();
        den += sum_sq(&f.input);
    }
    let residual = if den == 0.0 { 0.0 } else { (num / den).sqrt() };
    Ok(ConjugationResidual { residual, boundary_ratio: worst })
}

/// Ten Gaussian-windowed polynomials in `(η, t)`.
pub fn conjugation_test_functions() -> Vec<Expr> {
    let g = "exp(-(eta1^2 + eta2^2)/2)";
    [
        "1",
        "eta1",
        "eta2",
        "eta1*eta2",
        "eta1^2 - 1",
        "t1",
        "t2*eta1",
        "(1 + t1*t2)*eta2^2",
        "eta1 + i*eta2",
        "t1^2 + eta1*eta2 - t2",
    ]
    .into_iter()
    .map(|p| crate::expr::parse(&format!("({p})*{g}")).expect("valid literal"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::kirillov_matrix;

    fn gaussian(a: f64, b: f64) -> Complex64 {
        Complex64::new((-(a * a + b * b) / 2.0).exp(), 0.0)
    }

    #[test]
    fn gaussian_is_self_dual_and_round_trips() {
        let grid = FourierGrid::new(12.0, 128).unwrap();
        let f = grid.sample_s(gaussian);
        let ff = grid.forward(&f);
        let expect = grid.sample_eta(gaussian);
        let err = ff.iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        let back = grid.inverse(&ff);
        let err = back.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!((grid.norm_eta(&ff) - grid.norm_s(&f)).abs() < 1e-10);
    }

    #[test]
    fn position_becomes_derivative() {
        // F(s1 f) = i ∂_η1 F f, with ∂_η1 e^{−|η|²/2} = −η1 e^{−|η|²/2}.
        let grid = FourierGrid::new(12.0, 128).unwrap();
        let f = grid.sample_s(|a, b| a * gaussian(a, b));
        let lhs = grid.forward(&f);
        let rhs = grid.sample_eta(|a, b| Complex64::i() * -a * gaussian(a, b));
        let err = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn guard_rejects_slow_decay() {
        let grid = FourierGrid::new(4.0, 16).unwrap();
        let f = grid.sample_s(|a, _| Complex64::new(1.0 / (1.0 + a * a), 0.0));
        assert!(matches!(grid.guard(&f), Err(RepnError::Aliasing { .. })));
        assert!(FourierGrid::new(4.0, 24).is_err());
    }

    #[test]
    fn conjugation_matches_closed_form() {
        let grid = FourierGrid::new(12.0, 128).unwrap();
        let l = Lambda::from_ratio(1, 1).unwrap();
        let w = kirillov_matrix(&l).form;
        let f = &conjugation_test_functions()[6];
        for u in AlgebraElement::basis_all() {
            let r = conjugation_check(&u, &l, f, &grid, &ChartConvention::literal(), &w).unwrap();
            assert!(r.residual < 1e-6, "{u}: {}", r.residual);
        }
    }
}
