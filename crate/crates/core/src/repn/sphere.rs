use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::expr::{Evaluator, Expr};

/// Variable names of sphere functions.
pub const SPHERE_VARS: [&str; 3] = ["sigma1", "sigma2", "sigma3"];

/// A point on the sphere of the given radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    pub sigma: [f64; 3],
    pub radius: f64,
}

impl SpherePoint {
    /// Rejects points farther than `1e-12` (relative) from the sphere.
    pub fn new(sigma: [f64; 3], radius: f64) -> Option<Self> {
        let norm = sigma.iter().map(|x| x * x).sum::<f64>().sqrt();
        ((norm - radius).abs() <= 1e-12 * radius.max(1.0)).then_some(Self { sigma, radius })
    }

    /// Point at colatitude `theta` and longitude `phi`.
    pub fn from_angles(theta: f64, phi: f64, radius: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self { sigma: [radius * st * cp, radius * st * sp, radius * ct], radius }
    }
}

type Closure = Arc<dyn Fn(&[f64; 3]) -> Complex64 + Send + Sync>;

/// A function on the sphere: a symbolic expression in `sigma1..3` or an
/// opaque evaluator.
#[derive(Clone)]
pub enum SphereFunction {
    Symbolic { expr: Expr, eval: Evaluator },
    BlackBox(Closure),
}

impl SphereFunction {
    /// Panics if `expr` mentions variables other than `sigma1..3`.
    pub fn symbolic(expr: Expr) -> Self {
        let eval = expr.evaluator(&SPHERE_VARS).expect("sphere functions use sigma1..3 only");
        Self::Symbolic { expr, eval }
    }

    pub fn parse(text: &str) -> Result<Self, crate::expr::ParseError> {
        Ok(Self::symbolic(crate::expr::parse(text)?))
    }

    pub fn black_box(f: impl Fn(&[f64; 3]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self::BlackBox(Arc::new(f))
    }

    pub fn eval(&self, sigma: &[f64; 3]) -> Complex64 {
        match self {
            Self::Symbolic { eval, .. } => eval.eval(sigma),
            Self::BlackBox(f) => f(sigma),
        }
    }

    pub fn expr(&self) -> Option<&Expr> {
        match self {
            Self::Symbolic { expr, .. } => Some(expr),
            Self::BlackBox(_) => None,
        }
    }

    /// Forget the symbolic form, forcing pointwise evaluation.
    pub fn into_black_box(self) -> Self {
        match self {
            Self::Symbolic { eval, .. } => Self::black_box(move |s| eval.eval(s)),
            b => b,
        }
    }

    /// `{1, σ1, σ2, σ3, σ1σ2}`: spans enough to detect bracket mismatches.
    pub fn test_set() -> Vec<(String, SphereFunction)> {
        ["1", "sigma1", "sigma2", "sigma3", "sigma1*sigma2"]
            .into_iter()
            .map(|s| (s.to_string(), Self::parse(s).expect("valid literal")))
            .collect()
    }
}

impl fmt::Debug for SphereFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Symbolic { expr, .. } => write!(f, "SphereFunction({expr})"),
            Self::BlackBox(_) => f.write_str("SphereFunction(<black box>)"),
        }
    }
}
