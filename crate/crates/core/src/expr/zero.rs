//! Zero testing: symbolic where the normal form is canonical, seeded numeric
//! sampling otherwise. The path taken is always reported.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Expr, NormalForm};

#[derive(Clone, Debug)]
pub struct ZeroTestConfig {
    pub seed: u64,
    pub samples: usize,
    pub threshold: f64,
    /// Samples are drawn uniformly from `[-range, range]` per variable.
    pub range: f64,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        Self { seed: 0x5eed, samples: 32, threshold: 1e-10, range: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum ZeroPath {
    /// Decided from the normal form alone.
    Symbolic,
    /// Decided by evaluating at seeded random points.
    Numeric { seed: u64, samples: usize, max_abs: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroTest {
    pub is_zero: bool,
    #[serde(flatten)]
    pub path: ZeroPath,
}

impl ZeroTest {
    pub fn run(e: &Expr, config: &ZeroTestConfig) -> ZeroTest {
        Self::run_normal(&NormalForm::from_expr(e), config)
    }

    pub fn run_normal(nf: &NormalForm, config: &ZeroTestConfig) -> ZeroTest {
        if nf.is_zero() {
            return ZeroTest { is_zero: true, path: ZeroPath::Symbolic };
        }
        if nf.is_canonical() {
            return ZeroTest { is_zero: false, path: ZeroPath::Symbolic };
        }
        let max_abs = sample_max(nf, config);
        ZeroTest {
            is_zero: max_abs <= config.threshold,
            path: ZeroPath::Numeric { seed: config.seed, samples: config.samples, max_abs },
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.path, ZeroPath::Symbolic)
    }
}

/// Largest magnitude over `config.samples` finite evaluations; points that
/// land on a pole are redrawn.
fn sample_max(nf: &NormalForm, config: &ZeroTestConfig) -> f64 {
    let vars: Vec<String> = nf.variables().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut max_abs: f64 = 0.0;
    let mut taken = 0;
    let mut attempts = 0;
    while taken < config.samples && attempts < config.samples * 20 {
        attempts += 1;
        let point: Vec<f64> = vars.iter().map(|_| rng.gen_range(-config.range..=config.range)).collect();
        let lookup = |name: &str| vars.iter().position(|v| v == name).map(|k| point[k]);
        let value = nf.evaluate_with(&lookup).unwrap_or(num_complex::Complex64::new(f64::NAN, 0.0));
        if !value.re.is_finite() || !value.im.is_finite() {
            continue;
        }
        max_abs = max_abs.max(value.norm());
        taken += 1;
    }
    if taken < config.samples {
        f64::INFINITY
    } else {
        max_abs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn z(s: &str) -> ZeroTest {
        parse(s).unwrap().is_zero()
    }

    #[test]
    fn symbolic_decisions() {
        let t = z("(x+y)^2 - x^2 - 2*x*y - y^2");
        assert!(t.is_zero && t.is_symbolic());
        let t = z("x*exp(i*y) - 1");
        assert!(!t.is_zero && t.is_symbolic());
        let t = z("cos(x)^2 + sin(x)^2 - 1");
        assert!(t.is_zero && t.is_symbolic());
    }

    #[test]
    fn numeric_fallback_for_rational_functions() {
        let t = z("1/(x+1) + 1/(x-1) - 2*x/(x^2 - 1)");
        assert!(t.is_zero, "{t:?}");
        assert!(!t.is_symbolic());
        let t = z("1/(x+1) - 1/(x+2)");
        assert!(!t.is_zero);
    }

    #[test]
    fn float_roundoff_is_zero_numerically() {
        let t = z("pi*x - 3.141592653589793*x");
        assert!(t.is_zero);
    }

    #[test]
    fn deterministic_for_seed() {
        let cfg = ZeroTestConfig { seed: 7, ..Default::default() };
        let e = parse("1/(x+1) - 1/(x+3)").unwrap();
        assert_eq!(e.is_zero_with(&cfg), e.is_zero_with(&cfg));
    }
}
