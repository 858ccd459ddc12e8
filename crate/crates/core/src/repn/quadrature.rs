use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use super::sphere::SphereFunction;
use super::RepnError;

/// Gauss–Legendre in `cos θ` times uniform longitude on the sphere of radius `radius`.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub radius: f64,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(n_theta: usize, n_phi: usize, radius: f64) -> Result<Self, RepnError> {
        if n_phi == 0 || !(radius.is_finite() && radius > 0.0) {
            return Err(RepnError::BadGrid(format!("need n_phi >= 1 and radius > 0, got {n_phi}, {radius}")));
        }
        let gl = GaussLegendre::new(n_theta).map_err(|e| RepnError::BadGrid(e.to_string()))?;
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let r2 = radius * radius;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for &(x, w) in gl.as_node_weight_pairs() {
            let st = (1.0 - x * x).max(0.0).sqrt();
            for k in 0..n_phi {
                let (sp, cp) = (k as f64 * dphi).sin_cos();
                nodes.push([radius * st * cp, radius * st * sp, radius * x]);
                weights.push(w * dphi * r2);
            }
        }
        Ok(Self { n_theta, n_phi, radius, nodes, weights })
    }

    /// Node counts `n_θ = 24 + 4⌈λ‖r‖⌉`, `n_φ = 2n_θ`.
    pub fn heuristic_counts(lambda: f64, r_norm: f64) -> (usize, usize) {
        let n = 24 + 4 * (lambda * r_norm).ceil() as usize;
        (n, 2 * n)
    }

    pub fn heuristic(lambda: f64, r_norm: f64, radius: f64) -> Result<Self, RepnError> {
        let (a, b) = Self::heuristic_counts(lambda, r_norm);
        Self::new(a, b, radius)
    }

    /// Both node counts doubled.
    pub fn refined(&self) -> Result<Self, RepnError> {
        Self::new(2 * self.n_theta, 2 * self.n_phi, self.radius)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Values at every node, in node order.
    pub fn sample(&self, f: &SphereFunction) -> Vec<Complex64> {
        self.nodes.par_iter().map(|s| f.eval(s)).collect()
    }

    /// `⟨f, h⟩ = ∫ conj(f) h`.
    pub fn inner(&self, f: &SphereFunction, h: &SphereFunction) -> Complex64 {
        let (a, b) = (self.sample(f), self.sample(h));
        // Sequential sum in node order keeps the result thread-count independent.
        a.iter().zip(&b).zip(&self.weights).map(|((x, y), w)| x.conj() * y * w).sum()
    }

    /// `max |f − h|` over the nodes.
    pub fn sup_diff(&self, f: &SphereFunction, h: &SphereFunction) -> f64 {
        let (a, b) = (self.sample(f), self.sample(h));
        a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_and_exactness() {
        let g = QuadratureGrid::new(8, 16, 1.5).unwrap();
        let area = 4.0 * std::f64::consts::PI * 1.5 * 1.5;
        assert!((g.total_weight() - area).abs() < 1e-10);
        // ∫ σ3² = r² · area / 3
        let f = SphereFunction::parse("sigma3").unwrap();
        let v = g.inner(&f, &f);
        assert!((v.re - 1.5 * 1.5 * area / 3.0).abs() < 1e-10);
        let x = SphereFunction::parse("sigma1*sigma2").unwrap();
        assert!(g.inner(&SphereFunction::parse("1").unwrap(), &x).norm() < 1e-12);
        assert!(QuadratureGrid::new(1, 4, 1.0).is_err());
        assert_eq!(QuadratureGrid::heuristic_counts(1.0, 1.0), (28, 56));
    }
}
