use rayon::prelude::*;
use serde_json::json;

use super::{anchors, Suite, SuiteConfig, SuiteError, SuiteOutput};
use crate::expr::{parse, ZeroTest};
use crate::lie::AlgebraElement;
use crate::moyal::StarConfig;
use crate::orbit::ChartConvention;
use crate::polarization::{
    character_grid, convention_search, eigen_check, make_f_chi, ode_residual, profile_family, stays_polarized,
    superposition_demo, translation_energies_commute, Character,
};
use crate::report::{exact_residual, Section};

/// Half-width of the character box and the pointwise quadrature order.
const SUPERPOSITION_BOX: f64 = 1.0;
const SUPERPOSITION_NODES: usize = 48;

/// Character eigenfunctions of the translation energies, their stability, and
/// the superposition over a box of characters.
pub struct PolarizationSuite;

fn failures(items: impl IntoIterator<Item = (String, ZeroTest)>) -> (f64, Vec<String>) {
    let mut worst: f64 = 0.0;
    let mut failing = Vec::new();
    for (label, z) in items {
        let r = exact_residual(&z);
        if r > 0.0 {
            failing.push(label);
        }
        worst = worst.max(r);
    }
    (worst, failing)
}

impl Suite for PolarizationSuite {
    fn name(&self) -> &'static str {
        "verify-polarization"
    }

    fn description(&self) -> &'static str {
        "character eigenfunctions of the translation energies and their superposition"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteOutput, SuiteError> {
        let tol = &cfg.tolerances;
        let mut s = Section::default();
        let profiles = profile_family();
        for lambda in &cfg.lambdas {
            let w = match cfg.bivector_for(lambda) {
                Ok(w) => w,
                Err(e) => {
                    s.check(format!("bivector available (lambda={lambda})"), anchors::EIGEN, 1.0, "symbolic", tol, Some(json!({ "error": e })));
                    continue;
                }
            };
            let star_cfg = &StarConfig::new(w);
            let chars: Vec<Character> = match &cfg.chi {
                Some((a, b)) => vec![Character::new(a.clone(), b.clone(), lambda.clone())],
                None => character_grid(lambda),
            };
            let family: Vec<_> = chars
                .iter()
                .flat_map(|c| profiles.iter().map(move |p| (c.clone(), p.clone())))
                .enumerate()
                .map(|(k, (c, p))| make_f_chi(&c, &p).map(|f| (k, f)))
                .collect::<Result<_, _>>()
                .map_err(|e| SuiteError::Precondition(e.to_string()))?;

            let eigen: Vec<_> = family
                .par_iter()
                .flat_map(|(k, f)| {
                    (1..=3).into_par_iter().map(move |i| {
                        let c = eigen_check(f, i, star_cfg, &cfg.zero).expect("index in range");
                        (format!("member {k} E{i}"), c.zero)
                    })
                })
                .collect();
            let (r, failing) = failures(eigen);
            s.check(format!("eigenfunctions of E1, E2, E3 (lambda={lambda})"), anchors::EIGEN, r, "symbolic", tol, Some(json!({ "members": family.len(), "failing": failing })));

            let ode: Vec<_> = family
                .par_iter()
                .flat_map(|(k, f)| {
                    [(1, 2), (2, 1)].into_par_iter().map(move |p| {
                        let e = ode_residual(&f.expr, &f.chi, p).expect("valid pairing");
                        (format!("member {k} pairing {p:?}"), e.is_zero())
                    })
                })
                .collect();
            let (r, failing) = failures(ode);
            s.check(format!("first-order equations (lambda={lambda})"), anchors::ODE, r, "symbolic", tol, Some(json!({ "pairings": [[1, 2], [2, 1]], "failing": failing })));

            let conv = &cfg.convention;
            let unstable: Vec<String> = family
                .par_iter()
                .flat_map(|(k, f)| {
                    (4..=6).into_par_iter().filter_map(move |b| {
                        let u = AlgebraElement::basis(b).expect("basis index");
                        (!stays_polarized(&u, f, conv, star_cfg)).then(|| format!("member {k} {u}"))
                    })
                })
                .collect();
            s.check(format!("stable under translation operators (lambda={lambda})"), anchors::STABILITY, unstable.len() as f64, "symbolic", tol, Some(json!({ "failing": unstable })));

            let commute = translation_energies_commute(lambda, star_cfg);
            s.check(format!("translation energies commute (lambda={lambda})"), anchors::COMMUTING, if commute { 0.0 } else { 1.0 }, "symbolic", tol, None);

            let psi = parse("1 + t1").expect("literal");
            let demo = superposition_demo(lambda, &psi, SUPERPOSITION_BOX, SUPERPOSITION_NODES);
            s.check(format!("superposition closed form (lambda={lambda})"), anchors::SUPERPOSITION, demo.max_error, "quadrature", tol, Some(json!(demo)));
            let excess = ((demo.l2_truncated - demo.l2_closed).abs() - demo.tail_bound).max(0.0);
            s.check(format!("superposition square integrable (lambda={lambda})"), anchors::SUPERPOSITION, excess, "quadrature", tol, Some(json!({ "l2_truncated": demo.l2_truncated, "l2_closed": demo.l2_closed, "tail_bound": demo.tail_bound })));

            let candidates = convention_search(lambda, &cfg.zero);
            let found: Vec<_> = candidates.iter().filter(|c| c.solvable && c.eigen_exact).collect();
            let ok = found.len() == 1
                && ChartConvention::by_name(&found[0].convention)
                    .is_ok_and(|c| c.same_assignment(&ChartConvention::polarized()));
            s.check(
                format!("fiber assignment search (lambda={lambda})"),
                anchors::CONVENTION,
                if ok { 0.0 } else { 1.0 },
                "symbolic",
                tol,
                Some(json!({
                    "tried": candidates.len(),
                    "solvable": candidates.iter().filter(|c| c.solvable).count(),
                    "surviving": found.iter().map(|c| c.convention.clone()).collect::<Vec<_>>(),
                })),
            );
        }
        Ok(SuiteOutput { section: s, csv: None })
    }
}
