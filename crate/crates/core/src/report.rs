//! Machine-readable verification reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::expr::{ZeroPath, ZeroTest};

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// Anchor for records that validate infrastructure rather than an identity.
pub const PLUMBING: &str = "plumbing";

/// Named tolerances; every verdict compares a residual against one of these.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(BTreeMap::from([
            ("symbolic", 0.0),
            ("fft", 1e-6),
            ("fft-identity", 1e-10),
            ("transform", 1e-8),
            ("quadrature", 1e-8),
            ("pointwise", 1e-10),
            ("finite-difference", 1e-7),
            ("flow-bracket", 1e-9),
        ]))
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self.0.get(name).unwrap_or_else(|| panic!("unknown tolerance `{name}`"))
    }

    /// Override one tolerance; unknown names and negative values are rejected.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(format!("tolerance `{name}` must be a finite non-negative number"));
        }
        match self.0.get_mut(name) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(format!("unknown tolerance `{name}`; known: {}", self.names().join(", "))),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.0.keys().copied().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// The identity the check exercises, or [`PLUMBING`].
    pub anchor: String,
    pub residual: f64,
    /// Name of the tolerance in [`Tolerances`].
    pub tolerance_name: String,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

/// Informational output that carries no verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub name: String,
    pub anchor: String,
    pub value: Value,
}

/// `0` for a symbolically zero residual, the sampled magnitude for a
/// numerically decided one, and `1` for a symbolically nonzero one. Only the
/// first passes an exact tolerance.
pub fn exact_residual(z: &ZeroTest) -> f64 {
    match (&z.path, z.is_zero) {
        (ZeroPath::Symbolic, true) => 0.0,
        (ZeroPath::Symbolic, false) => 1.0,
        (ZeroPath::Numeric { max_abs, .. }, _) => max_abs.max(f64::MIN_POSITIVE),
    }
}

/// Checks and diagnostics collected by one suite.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Section {
    pub checks: Vec<CheckRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Section {
    pub fn check(
        &mut self,
        name: impl Into<String>,
        anchor: &str,
        residual: f64,
        tolerance_name: &str,
        tolerances: &Tolerances,
        detail: Option<Value>,
    ) {
        let tolerance = tolerances.get(tolerance_name);
        // NaN residuals fail.
        let verdict = if residual <= tolerance { Verdict::Pass } else { Verdict::Fail };
        self.checks.push(CheckRecord {
            name: name.into(),
            anchor: anchor.to_string(),
            residual,
            tolerance_name: tolerance_name.to_string(),
            tolerance,
            verdict,
            detail,
        });
    }

    pub fn diagnostic(&mut self, name: impl Into<String>, anchor: &str, value: Value) {
        self.diagnostics.push(Diagnostic { name: name.into(), anchor: anchor.to_string(), value });
    }

    pub fn extend(&mut self, other: Section) {
        self.checks.extend(other.checks);
        self.diagnostics.extend(other.diagnostics);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl ReportDocument {
    pub fn new(command: &str, seed: u64, config: Value, section: Section) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "moyal-m3",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config,
            passed: section.passed(),
            checks: section.checks,
            diagnostics: section.diagnostics,
            wall_time_seconds: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_follow_residuals() {
        let tol = Tolerances::default();
        let mut s = Section::default();
        s.check("a", PLUMBING, 0.0, "symbolic", &tol, None);
        assert!(s.passed());
        s.check("b", PLUMBING, f64::NAN, "fft", &tol, None);
        assert!(!s.passed());
        let mut t = Tolerances::default();
        assert!(t.set("fft", 1e-3).is_ok());
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("fft", -1.0).is_err());
    }

    #[test]
    fn exact_residuals() {
        let sym = |z| ZeroTest { is_zero: z, path: ZeroPath::Symbolic };
        assert_eq!(exact_residual(&sym(true)), 0.0);
        assert_eq!(exact_residual(&sym(false)), 1.0);
        let num = ZeroTest { is_zero: true, path: ZeroPath::Numeric { seed: 1, samples: 2, max_abs: 0.0 } };
        assert!(exact_residual(&num) > 0.0);
    }
}
