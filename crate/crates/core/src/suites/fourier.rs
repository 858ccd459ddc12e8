use std::fmt::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::{anchors, Suite, SuiteConfig, SuiteError, SuiteOutput};
use crate::lie::AlgebraElement;
use crate::orbit::{kirillov_matrix, ChartConvention};
use crate::repn::{conjugation_check, conjugation_fields, conjugation_test_functions, FourierGrid, LHAT_VARS, T_SAMPLES};
use crate::report::{Section, PLUMBING};

/// The closed-form operator holds for this energy and bivector; the default
/// polarized assignment changes `Ũ` and would need a different closed form.
const SETUP_NOTE: &str = "closed form derived for s1 paired with x2, s2 with x3, and bivector lambda times the unit pattern";

/// Closed-form `l̂_U` against the FFT conjugate of `l_U`, plus transform identities.
pub struct FourierSuite;

fn gaussian(a: f64, b: f64) -> Complex64 {
    Complex64::new((-(a * a + b * b) / 2.0).exp(), 0.0)
}

fn max_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

impl Suite for FourierSuite {
    fn name(&self) -> &'static str {
        "fourier-check"
    }

    fn description(&self) -> &'static str {
        "partial Fourier conjugation of the left star operators on a uniform grid"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutput, SuiteError> {
        let tol = &cfg.tolerances;
        let grid = FourierGrid::new(cfg.fourier_extent, cfg.fourier_n).map_err(|e| SuiteError::Precondition(e.to_string()))?;
        let pre = |e: crate::repn::RepnError| SuiteError::Precondition(e.to_string());
        let mut s = Section::default();

        let g = grid.sample_s(gaussian);
        s.check("Gaussian transform", anchors::GAUSSIAN_SELF_DUAL, max_gap(&grid.forward(&g), &grid.sample_eta(gaussian)), "transform", tol, None);
        let sg = grid.sample_s(|a, b| a * gaussian(a, b));
        let deriv = grid.sample_eta(|a, b| Complex64::i() * -a * gaussian(a, b));
        s.check("position to derivative", anchors::FOURIER_POSITION, max_gap(&grid.forward(&sg), &deriv), "fft", tol, None);

        let tests = conjugation_test_functions();
        // Parseval and round trip on every test function at every fiber sample.
        let (mut parseval, mut round): (f64, f64) = (0.0, 0.0);
        for f in &tests {
            let ev = f.evaluator(&LHAT_VARS).expect("test functions use eta and t");
            for [t1, t2] in T_SAMPLES {
                let h = grid.sample_eta(|a, b| ev.eval(&[a, b, t1, t2]));
                let back = grid.inverse(&h);
                let nh = grid.norm_eta(&h);
                parseval = parseval.max((grid.norm_s(&back) - nh).abs() / nh);
                let sup = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
                round = round.max(max_gap(&grid.forward(&back), &h) / sup);
            }
        }
        s.check("Parseval", PLUMBING, parseval, "fft-identity", tol, Some(json!({ "functions": tests.len() })));
        s.check("inverse after forward", PLUMBING, round, "fft-identity", tol, Some(json!({ "functions": tests.len() })));

        let conv = ChartConvention::literal();
        s.diagnostic("conjugation setup", anchors::CONJUGATION, json!({ "convention": conv.name, "bivector": "form", "note": SETUP_NOTE }));
        for lambda in &cfg.lambdas {
            let w = kirillov_matrix(lambda).form;
            for u in AlgebraElement::basis_all() {
                let results: Vec<_> = tests
                    .par_iter()
                    .map(|f| conjugation_check(&u, lambda, f, &grid, &conv, &w))
                    .collect::<Result<_, _>>()
                    .map_err(pre)?;
                let r = results.iter().map(|r| r.residual).fold(0.0, f64::max);
                let b = results.iter().map(|r| r.boundary_ratio).fold(0.0, f64::max);
                s.check(
                    format!("conjugation {u} (lambda={lambda})"),
                    anchors::CONJUGATION,
                    r,
                    "fft",
                    tol,
                    Some(json!({ "functions": tests.len(), "boundary_ratio": b, "n": grid.n, "extent": grid.extent })),
                );
            }
        }

        // Plot data: both sides for E2 on the second test function at t = 0.
        let lambda = cfg.lambdas.first().ok_or_else(|| SuiteError::Precondition("no lambda given".into()))?;
        let e2 = AlgebraElement::basis(5).expect("basis index");
        let fields = conjugation_fields(&e2, lambda, &tests[1], &grid, &conv, &kirillov_matrix(lambda).form, [0.0, 0.0]).map_err(pre)?;
        let mut csv = String::from("eta1,eta2,formula_re,formula_im,conjugated_re,conjugated_im\n");
        let n = grid.n;
        for idx in 0..n * n {
            let (a, b) = (fields.formula[idx], fields.conjugated[idx]);
            let _ = writeln!(csv, "{},{},{:e},{:e},{:e},{:e}", grid.eta(idx / n), grid.eta(idx % n), a.re, a.im, b.re, b.im);
        }
        Ok(SuiteOutput { section: s, csv: Some(csv) })
    }
}
