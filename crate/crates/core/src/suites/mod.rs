//! Verification suites, registered by name and selected at runtime.

mod algebra;
mod covariance;
mod fourier;
mod polarization;
mod rep;

pub use algebra::AlgebraSuite;
pub use covariance::CovarianceSuite;
pub use fourier::FourierSuite;
pub use polarization::PolarizationSuite;
pub use rep::RepSuite;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::{Coeff, Expr, GaussianRational, ZeroTestConfig};
use crate::moyal::BivectorRegistry;
use crate::orbit::{ChartConvention, Lambda, SymplecticMatrix, CHART_VARS};
use crate::report::{Section, Tolerances};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuiteError {
    #[error("{0}")]
    Precondition(String),
}

/// Everything a suite may read; echoed into the report.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub lambdas: Vec<Lambda>,
    /// Radii for the finite-difference generator checks, whose `O(t²)` error
    /// grows like `λ⁶` on the sphere of radius `λ`.
    pub infinitesimal_lambdas: Vec<Lambda>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub bivector: String,
    pub convention: ChartConvention,
    pub fourier_extent: f64,
    pub fourier_n: usize,
    /// `(n_θ, n_φ)` for every sphere grid, replacing the defaults.
    pub sphere_grid: Option<(usize, usize)>,
    pub chi: Option<(GaussianRational, GaussianRational)>,
    pub zero: ZeroTestConfig,
    pub random_instances: usize,
    pub associativity_instances: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let l = |n, d| Lambda::from_ratio(n, d).expect("positive literal");
        Self {
            lambdas: vec![l(1, 2), l(1, 1), l(3, 1)],
            infinitesimal_lambdas: vec![l(1, 2), l(1, 1)],
            seed: 1,
            tolerances: Tolerances::default(),
            bivector: "solved".into(),
            convention: ChartConvention::default(),
            fourier_extent: 12.0,
            fourier_n: 256,
            sphere_grid: None,
            chi: None,
            zero: ZeroTestConfig::default(),
            random_instances: 50,
            associativity_instances: 100,
        }
    }
}

impl SuiteConfig {
    pub fn to_json(&self) -> Value {
        let ls = |v: &[Lambda]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        let atom = |g: &GaussianRational| Coeff::Exact(g.clone()).to_atom();
        json!({
            "lambdas": ls(&self.lambdas),
            "infinitesimal_lambdas": ls(&self.infinitesimal_lambdas),
            "tolerances": self.tolerances,
            "bivector": self.bivector,
            "convention": self.convention.name,
            "fourier": { "extent": self.fourier_extent, "n": self.fourier_n },
            "sphere_grid": self.sphere_grid,
            "chi": self.chi.as_ref().map(|(a, b)| [atom(a), atom(b)]),
            "zero_test": {
                "seed": self.zero.seed,
                "samples": self.zero.samples,
                "threshold": self.zero.threshold,
                "range": self.zero.range,
            },
            "random_instances": self.random_instances,
            "associativity_instances": self.associativity_instances,
        })
    }

    /// The selected bivector for `λ` under the configured convention.
    pub fn bivector_for(&self, lambda: &Lambda) -> Result<SymplecticMatrix, String> {
        BivectorRegistry::default()
            .get(&self.bivector)
            .and_then(|s| s.bivector(lambda, &self.convention))
            .map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOutput {
    pub section: Section,
    /// Plot-ready samples, when the suite produces any.
    pub csv: Option<String>,
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutput, SuiteError>;
}

#[derive(Clone)]
pub struct SuiteRegistry {
    suites: BTreeMap<&'static str, Arc<dyn Suite>>,
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        Self { suites: BTreeMap::new() }
    }

    pub fn register(&mut self, suite: Arc<dyn Suite>) {
        self.suites.insert(suite.name(), suite);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Suite>> {
        self.suites.get(name).cloned()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.keys().copied().collect()
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(AlgebraSuite));
        r.register(Arc::new(CovarianceSuite));
        r.register(Arc::new(FourierSuite));
        r.register(Arc::new(RepSuite));
        r.register(Arc::new(PolarizationSuite));
        r
    }
}

/// A random polynomial of degree at most two in the chart variables with
/// four terms and small rational coefficients.
pub fn random_quadratic(rng: &mut impl Rng) -> Expr {
    let mut monomials: Vec<Vec<&str>> = vec![vec![]];
    for (i, a) in CHART_VARS.iter().enumerate() {
        monomials.push(vec![a]);
        for b in &CHART_VARS[i..] {
            monomials.push(vec![a, b]);
        }
    }
    let mut terms = Vec::new();
    for _ in 0..4 {
        let m = &monomials[rng.gen_range(0..monomials.len())];
        let mut c = 0;
        while c == 0 {
            c = rng.gen_range(-3..=3);
        }
        let d = rng.gen_range(1..=2);
        let mut factors = vec![Expr::ratio(c, d)];
        factors.extend(m.iter().map(|v| Expr::var(v)));
        terms.push(Expr::product(factors));
    }
    Expr::sum(terms)
}

/// A random linear function of the chart variables.
pub fn random_linear(rng: &mut impl Rng) -> Expr {
    let mut terms: Vec<Expr> =
        CHART_VARS.iter().map(|v| Expr::ratio(rng.gen_range(-4..=4), 1) * Expr::var(v)).collect();
    terms.push(Expr::ratio(rng.gen_range(-4..=4), 3));
    Expr::sum(terms)
}

/// Identity names used as report anchors.
pub mod anchors {
    pub const LIE_BRACKET: &str = "Lie bracket equals the matrix commutator";
    pub const JACOBI: &str = "Jacobi identity";
    pub const ANTISYMMETRY: &str = "antisymmetry of the Lie bracket";
    pub const COADJOINT: &str = "coadjoint action is a left action";
    pub const EXPONENTIAL: &str = "closed-form exponential of the algebra";
    pub const HIGHER_ORDERS: &str = "higher Moyal orders vanish on energy functions";
    pub const BRACKET_IS_POISSON: &str = "Moyal bracket of energies equals their Poisson bracket";
    pub const ORIGIN_COVARIANCE: &str = "Poisson bracket of energies equals the bracket energy at the base point";
    pub const GLOBAL_COVARIANCE: &str = "Poisson bracket of energies equals the bracket energy everywhere";
    pub const FORM_AGREEMENT: &str = "Poisson bracket equals the Kirillov form on Hamiltonian fields";
    pub const ASSOCIATIVITY: &str = "associativity of the star product";
    pub const LINEAR_TRUNCATION: &str = "star product with a linear factor stops at first order";
    pub const CONJUGATION: &str = "Fourier conjugate of the left star operator";
    pub const FOURIER_POSITION: &str = "Fourier transform turns position into derivative";
    pub const GAUSSIAN_SELF_DUAL: &str = "Gaussian is self-dual under the Fourier transform";
    pub const FACTORED_UNITARY: &str = "factored unitary equals the induced representation";
    pub const HOMOMORPHISM: &str = "unitaries compose like group elements";
    pub const UNITARITY: &str = "unitarity of the induced representation";
    pub const INFINITESIMAL: &str = "derivative of the one-parameter unitary is the generator";
    pub const CAUCHY: &str = "one-parameter unitary solves the generator's evolution equation";
    pub const GENERATOR_BRACKETS: &str = "generators satisfy the Lie algebra relations";
    pub const EIGEN: &str = "character eigenfunctions of the translation energies";
    pub const ODE: &str = "first-order equations solved by the character family";
    pub const STABILITY: &str = "character family is stable under translation operators";
    pub const COMMUTING: &str = "translation energies commute under the Moyal bracket";
    pub const SUPERPOSITION: &str = "superposition of characters over a bounded box";
    pub const CONVENTION: &str = "unique fiber assignment with exact covariance and polarization";
    pub const LEFT_COMMUTATOR: &str = "commutator of left star operators";
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Empty;

    impl Suite for Empty {
        fn name(&self) -> &'static str {
            "empty"
        }
        fn description(&self) -> &'static str {
            "no checks"
        }
        fn run(&self, _: &SuiteConfig) -> Result<SuiteOutput, SuiteError> {
            Ok(SuiteOutput::default())
        }
    }

    #[test]
    fn registry_selects_by_name() {
        let r = SuiteRegistry::default();
        assert_eq!(r.names(), ["fourier-check", "verify-algebra", "verify-covariance", "verify-polarization", "verify-rep"]);
        assert!(r.get("nope").is_none());
        let mut r = SuiteRegistry::empty();
        r.register(Arc::new(Empty));
        let out = r.get("empty").unwrap().run(&SuiteConfig::default()).unwrap();
        assert!(out.section.passed() && out.section.checks.is_empty());
    }

    #[test]
    fn algebra_suite_passes_and_is_seeded() {
        let cfg = SuiteConfig::default();
        let a = AlgebraSuite.run(&cfg).unwrap().section;
        assert!(a.passed());
        let b = AlgebraSuite.run(&SuiteConfig { seed: 2, ..cfg }).unwrap().section;
        assert_ne!(a.checks[3].residual, b.checks[3].residual);
    }

    #[test]
    fn unknown_bivector_is_reported() {
        let cfg = SuiteConfig { bivector: "nope".into(), lambdas: vec![Lambda::from_ratio(1, 1).unwrap()], ..SuiteConfig::default() };
        assert!(cfg.bivector_for(&cfg.lambdas[0]).is_err());
        let s = CovarianceSuite.run(&cfg).unwrap().section;
        assert!(!s.passed());
    }

    #[test]
    fn random_polynomials_are_seeded() {
        use rand::SeedableRng;
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        assert_eq!(random_quadratic(&mut a), random_quadratic(&mut b));
        assert!(random_quadratic(&mut a).variables().iter().all(|v| CHART_VARS.contains(&v.as_str())));
    }
}
