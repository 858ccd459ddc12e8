use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{anchors, random_linear, random_quadratic, Suite, SuiteConfig, SuiteError, SuiteOutput};
use crate::expr::{Expr, ZeroTest};
use crate::lie::AlgebraElement;
use crate::moyal::{covariance_report, poisson, solve_bivector, star_normal, BivectorRegistry, MaxOrder, StarConfig};
use crate::orbit::{ChartConvention, Lambda, SymplecticMatrix};
use crate::report::{exact_residual, Section, Tolerances};

/// Covariance of the energy functions and the star-product algebra.
pub struct CovarianceSuite;

fn pairs() -> Vec<(AlgebraElement, AlgebraElement)> {
    let b = AlgebraElement::basis_all();
    b.iter().flat_map(|u| b.iter().map(move |t| (u.clone(), t.clone()))).collect()
}

/// Worst exact residual and the labels of the failing instances.
fn worst(items: impl IntoIterator<Item = (String, ZeroTest)>) -> (f64, Vec<String>) {
    let mut r: f64 = 0.0;
    let mut failing = Vec::new();
    for (label, z) in items {
        let e = exact_residual(&z);
        if e > 0.0 {
            failing.push(label);
        }
        r = r.max(e);
    }
    (r, failing)
}

fn covariance_section(lambda: &Lambda, w: &SymplecticMatrix, cfg: &SuiteConfig, tol: &Tolerances) -> Section {
    let mut s = Section::default();
    let conv = &cfg.convention;
    let reports: Vec<_> =
        pairs().par_iter().map(|(u, t)| covariance_report(u, t, lambda, w, conv, &cfg.zero)).collect();
    let label = |r: &crate::moyal::CovarianceReport| format!("{},{}", r.u, r.t);
    let (higher, hf) = worst(reports.iter().flat_map(|r| {
        r.higher_orders.iter().map(move |(k, res)| (format!("{} r={k}", label(r)), res.zero.clone()))
    }));
    let (bracket, bf) = worst(reports.iter().map(|r| (label(r), r.bracket_minus_poisson.zero.clone())));
    let (origin, of) = worst(reports.iter().map(|r| (label(r), r.poisson_minus_energy_at_origin.zero.clone())));
    s.check(format!("P2 and P3 of energies vanish (lambda={lambda})"), anchors::HIGHER_ORDERS, higher, "symbolic", tol, Some(json!({ "failing": hf })));
    s.check(format!("Moyal bracket equals P1 (lambda={lambda})"), anchors::BRACKET_IS_POISSON, bracket, "symbolic", tol, Some(json!({ "failing": bf })));
    s.check(format!("origin covariance (lambda={lambda})"), anchors::ORIGIN_COVARIANCE, origin, "symbolic", tol, Some(json!({ "failing": of })));

    let global: Vec<String> =
        reports.iter().filter(|r| !r.poisson_minus_energy.is_zero()).map(label).collect();
    s.diagnostic(
        format!("global covariance on the flat chart (lambda={lambda})"),
        anchors::GLOBAL_COVARIANCE,
        json!({
            "failing_pairs": global.len(),
            "of": 36,
            "failing": global,
            "note": "P1 of two energies is constant while the bracket energy is linear, so only pairs with a constant bracket energy can hold away from the base point",
        }),
    );
    let form: Vec<String> = reports.iter().filter(|r| !r.poisson_minus_form.is_zero()).map(label).collect();
    s.diagnostic(
        format!("Kirillov form on Hamiltonian fields (lambda={lambda})"),
        anchors::FORM_AGREEMENT,
        json!({ "failing_pairs": form.len(), "of": 36, "failing": form }),
    );
    s
}

fn convention_diagnostics(lambda: &Lambda, cfg: &SuiteConfig, s: &mut Section) {
    let lit = ChartConvention::literal();
    let reg = BivectorRegistry::default();
    let mut counts = serde_json::Map::new();
    for name in ["unit", "form"] {
        let w = reg.get(name).and_then(|b| b.bivector(lambda, &lit)).expect("fixed bivectors always exist");
        let failing = pairs()
            .par_iter()
            .filter(|(u, t)| !covariance_report(u, t, lambda, &w, &lit, &cfg.zero).poisson_minus_energy_at_origin.is_zero())
            .count();
        counts.insert(name.into(), json!(failing));
    }
    let solved = solve_bivector(lambda, &lit).map(|b| json!({ "exact": b.exact, "residual_norm_sq": b.residual_norm_sq }));
    s.diagnostic(
        format!("literal fiber assignment (lambda={lambda})"),
        anchors::ORIGIN_COVARIANCE,
        json!({
            "convention": lit.name,
            "origin_failures_by_bivector": counts,
            "solved": solved.unwrap_or_else(|e| json!(e.to_string())),
        }),
    );
}

fn star_algebra(w: &SymplecticMatrix, cfg: &SuiteConfig, lambda: &Lambda, tol: &Tolerances) -> Section {
    let mut s = Section::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let triples: Vec<[Expr; 3]> = (0..cfg.associativity_instances)
        .map(|_| [random_quadratic(&mut rng), random_quadratic(&mut rng), random_quadratic(&mut rng)])
        .collect();
    let star_cfg = StarConfig::new(w.clone());
    let (assoc, af) = worst(triples.par_iter().enumerate().map(|(k, [f, g, h])| {
        let (f, g, h) = (f.normal_form(), g.normal_form(), h.normal_form());
        let left = star_normal(&star_normal(&f, &g, &star_cfg).value, &h, &star_cfg);
        let right = star_normal(&f, &star_normal(&g, &h, &star_cfg).value, &star_cfg);
        (format!("triple {k}"), ZeroTest::run_normal(&left.value.sub(&right.value), &cfg.zero))
    }).collect::<Vec<_>>());
    s.check(format!("associativity on quadratics (lambda={lambda})"), anchors::ASSOCIATIVITY, assoc, "symbolic", tol, Some(json!({ "instances": triples.len(), "failing": af })));

    // f ⋆ a against fa + ν P¹(f, a), with f carrying an exponential so the
    // degree bound does not cut the series short.
    let cases: Vec<(Expr, Expr)> = (0..cfg.random_instances)
        .map(|_| {
            let f = random_quadratic(&mut rng) * Expr::exp(Expr::i() * random_linear(&mut rng));
            (f, random_linear(&mut rng))
        })
        .collect();
    let deep = star_cfg.clone().with_max_order(MaxOrder::Fixed(4));
    let nu = Expr::Const(star_cfg.nu());
    let (trunc, tf) = worst(cases.par_iter().enumerate().map(|(k, (f, a))| {
        let full = star_normal(&f.normal_form(), &a.normal_form(), &deep).value;
        let two = (f.clone() * a.clone() + nu.clone() * poisson(f, a, w)).normal_form();
        (format!("case {k}"), ZeroTest::run_normal(&full.sub(&two), &cfg.zero))
    }).collect::<Vec<_>>());
    s.check(format!("linear right factor truncates (lambda={lambda})"), anchors::LINEAR_TRUNCATION, trunc, "symbolic", tol, Some(json!({ "instances": cases.len(), "orders_summed": 4, "failing": tf })));
    s
}

impl Suite for CovarianceSuite {
    fn name(&self) -> &'static str {
        "verify-covariance"
    }

    fn description(&self) -> &'static str {
        "covariance of energy functions under the selected bivector, and star associativity"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutput, SuiteError> {
        let tol = &cfg.tolerances;
        let mut s = Section::default();
        for lambda in &cfg.lambdas {
            let w = match cfg.bivector_for(lambda) {
                Ok(w) => w,
                Err(e) => {
                    s.check(format!("bivector available (lambda={lambda})"), anchors::ORIGIN_COVARIANCE, 1.0, "symbolic", tol, Some(json!({ "error": e })));
                    continue;
                }
            };
            let sol = solve_bivector(lambda, &cfg.convention);
            s.diagnostic(
                format!("bivector (lambda={lambda})"),
                anchors::ORIGIN_COVARIANCE,
                json!({
                    "source": cfg.bivector,
                    "convention": cfg.convention.name,
                    "matrix": w,
                    "solved_for_convention": sol.as_ref().map(|b| json!(b)).unwrap_or_else(|e| json!(e.to_string())),
                }),
            );
            s.extend(covariance_section(lambda, &w, cfg, tol));
            convention_diagnostics(lambda, cfg, &mut s);
            s.extend(star_algebra(&w, cfg, lambda, tol));
        }
        Ok(SuiteOutput { section: s, csv: None })
    }
}
