use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use moyal_m3::expr::{parse, Expr, GaussianRational};
use moyal_m3::lie::DualFunctional;
use moyal_m3::moyal::{star, StarConfig};
use moyal_m3::orbit::{chart_base, chart_to_functional_with, classify, energy_with, ChartConvention, ChartPoint, Lambda};
use moyal_m3::report::ReportDocument;
use moyal_m3::suites::{SuiteConfig, SuiteRegistry};
use nalgebra::Vector3;
use serde_json::json;

/// Environment variable capping the worker threads.
const THREADS_ENV: &str = "MOYAL_M3_THREADS";

const FOOTER: &str = "Tolerances: --tol.<name>=<value> overrides one of symbolic, fft, fft-identity, transform, \
quadrature, pointwise, finite-difference, flow-bracket.
Environment: MOYAL_M3_THREADS caps the worker threads.
Exit codes: 0 all checks pass, 1 a check failed, 2 usage or precondition error.";

#[derive(Parser, Debug)]
#[command(name = "moyal-m3", version, about = "Verify the star-product construction of the M(3) representations", after_help = FOOTER)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Basis brackets, Jacobi identity, group plumbing.
    #[command(after_help = FOOTER)]
    VerifyAlgebra(SuiteArgs),
    /// Covariance of the energy functions and star associativity.
    #[command(after_help = FOOTER)]
    VerifyCovariance(SuiteArgs),
    /// Unitaries on the sphere: composition, unitarity, generators.
    #[command(after_help = FOOTER)]
    VerifyRep(SuiteArgs),
    /// Character eigenfunctions and their superposition.
    #[command(after_help = FOOTER)]
    VerifyPolarization(SuiteArgs),
    /// Fourier conjugation of the left star operators.
    #[command(after_help = FOOTER)]
    FourierCheck(SuiteArgs),
    /// Orbit geometry.
    Orbit {
        #[command(subcommand)]
        action: OrbitCommand,
    },
    /// Star product of two chart expressions, term by term.
    StarEval {
        f: String,
        g: String,
        #[arg(long, default_value = "1")]
        lambda: String,
        #[arg(long, default_value = "solved")]
        bivector: String,
        #[arg(long)]
        convention: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum OrbitCommand {
    /// Orbit type of a dual functional.
    Classify {
        /// Rotation part as `a,b,c`.
        #[arg(long, default_value = "0,0,0")]
        mu: String,
        /// Translation part as `a,b,c`.
        #[arg(long, default_value = "0,0,0")]
        alpha: String,
    },
    /// Dual coordinates and energies at a chart point.
    Chart {
        #[arg(long, default_value = "1")]
        lambda: String,
        /// Chart point as `s1,s2,t1,t2`.
        #[arg(long, default_value = "0,0,0,0")]
        point: String,
        #[arg(long)]
        convention: Option<String>,
    },
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Comma-separated orbit radii, e.g. `1/2,1,3`.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sphere grid as `n_theta,n_phi`.
    #[arg(long)]
    grid: Option<String>,
    /// Fourier grid points per axis.
    #[arg(long)]
    n: Option<usize>,
    /// Fourier half-width of the position window.
    #[arg(long)]
    extent: Option<f64>,
    /// Bivector source: unit, form or solved.
    #[arg(long)]
    bivector: Option<String>,
    /// Fiber assignment, e.g. `polarized` or `s1=-x2,s2=+x1`.
    #[arg(long)]
    convention: Option<String>,
    /// Single character `a,b` instead of the default grid.
    #[arg(long)]
    chi: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write plot samples here as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Record wall time in the report, which makes it run-dependent.
    #[arg(long)]
    timing: bool,
}

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

/// Split `--tol.<name>=<v>` and `--tol.<name> <v>` off before clap sees the
/// rest, since the names are open-ended.
type Overrides = Vec<(String, f64)>;

fn take_tolerances(argv: Vec<String>) -> Result<(Vec<String>, Overrides), UsageError> {
    let mut rest = Vec::new();
    let mut tols = Vec::new();
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--tol.") else {
            rest.push(a);
            continue;
        };
        let (name, value) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => (flag.to_string(), it.next().ok_or_else(|| UsageError(format!("--tol.{flag} needs a value")))?),
        };
        let v: f64 = value.parse().map_err(|_| UsageError(format!("bad tolerance value `{value}`")))?;
        tols.push((name, v));
    }
    Ok((rest, tols))
}

fn numbers<const N: usize>(text: &str, what: &str) -> Result<[f64; N], UsageError> {
    let v: Vec<f64> = text.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| UsageError(format!("{what} needs {N} comma-separated numbers")))
}

fn lambdas(text: &str) -> Result<Vec<Lambda>, UsageError> {
    text.split(',').map(|p| p.trim().parse::<Lambda>().map_err(UsageError::from)).collect()
}

fn exact(text: &str) -> Result<GaussianRational, UsageError> {
    parse(text)?.exact_value().ok_or_else(|| UsageError(format!("`{text}` is not an exact constant")))
}

fn convention(name: Option<&str>) -> Result<ChartConvention, UsageError> {
    Ok(name.map(ChartConvention::by_name).transpose()?.unwrap_or_default())
}

fn suite_config(a: &SuiteArgs, tols: &[(String, f64)]) -> Result<SuiteConfig, UsageError> {
    let mut cfg = SuiteConfig { seed: a.seed, ..SuiteConfig::default() };
    if let Some(l) = &a.lambda {
        cfg.lambdas = lambdas(l)?;
        // The finite-difference generator check only runs at the radii it resolves.
        let keep: Vec<Lambda> = cfg.lambdas.iter().filter(|l| cfg.infinitesimal_lambdas.contains(l)).cloned().collect();
        cfg.infinitesimal_lambdas = keep;
    }
    if let Some(g) = &a.grid {
        let [t, p] = numbers::<2>(g, "--grid")?;
        if t < 2.0 || p < 2.0 || t.fract() != 0.0 || p.fract() != 0.0 {
            return Err(UsageError("--grid needs two integers of at least 2".into()));
        }
        cfg.sphere_grid = Some((t as usize, p as usize));
    }
    if let Some(n) = a.n {
        cfg.fourier_n = n;
    }
    if let Some(e) = a.extent {
        cfg.fourier_extent = e;
    }
    if let Some(b) = &a.bivector {
        cfg.bivector = b.clone();
    }
    cfg.convention = convention(a.convention.as_deref())?;
    if let Some(c) = &a.chi {
        let (x, y) = c.split_once(',').ok_or_else(|| UsageError("--chi needs `a,b`".into()))?;
        cfg.chi = Some((exact(x)?, exact(y)?));
    }
    for (name, v) in tols {
        cfg.tolerances.set(name, *v).map_err(UsageError)?;
    }
    Ok(cfg)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), UsageError> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run_suite(name: &str, a: &SuiteArgs, tols: &[(String, f64)]) -> Result<bool, UsageError> {
    let cfg = suite_config(a, tols)?;
    let suite = SuiteRegistry::default().get(name).ok_or_else(|| UsageError(format!("no suite `{name}`")))?;
    let start = Instant::now();
    let output = suite.run(&cfg)?;
    let mut doc = ReportDocument::new(name, cfg.seed, cfg.to_json(), output.section);
    if a.timing {
        doc.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    }
    emit(&doc.to_json(), a.out.as_ref())?;
    if let Some(path) = &a.csv {
        std::fs::write(path, output.csv.unwrap_or_default())?;
    }
    Ok(doc.passed)
}

fn star_eval(f: &str, g: &str, lambda: &str, bivector: &str, conv: Option<&str>) -> Result<String, UsageError> {
    let lambda: Lambda = lambda.parse()?;
    let cfg = SuiteConfig { bivector: bivector.to_string(), convention: convention(conv)?, ..SuiteConfig::default() };
    let w = cfg.bivector_for(&lambda).map_err(UsageError)?;
    let (fe, ge) = (parse(f)?, parse(g)?);
    let sc = StarConfig::new(w.clone());
    let p = star(&fe, &ge, &sc);
    let terms: Vec<_> = p
        .corrections
        .iter()
        .enumerate()
        .map(|(k, c)| json!({ "order": k + 1, "term": format!("P{}", k + 1), "value": c.to_expr().to_string() }))
        .collect();
    let doc = json!({
        "command": "star-eval",
        "f": fe.to_string(),
        "g": ge.to_string(),
        "lambda": lambda,
        "bivector": { "source": bivector, "convention": cfg.convention.name, "matrix": w },
        "nu": Expr::Const(sc.nu()).to_string(),
        "expansion": "f*g + sum over r of nu^r / r! P^r(f, g)",
        "product": (fe.clone() * ge.clone()).normal_form().to_expr().to_string(),
        "terms": terms,
        "order": p.order,
        "exact": p.exact,
        "value": p.expr().to_string(),
    });
    Ok(serde_json::to_string_pretty(&doc)?)
}

fn orbit(action: &OrbitCommand) -> Result<String, UsageError> {
    let doc = match action {
        OrbitCommand::Classify { mu, alpha } => {
            let (m, a) = (numbers::<3>(mu, "--mu")?, numbers::<3>(alpha, "--alpha")?);
            let f = DualFunctional::new(Vector3::from(m), Vector3::from(a));
            json!({ "command": "orbit classify", "mu": m, "alpha": a, "orbit": classify(&f) })
        }
        OrbitCommand::Chart { lambda, point, convention: c } => {
            let lambda: Lambda = lambda.parse()?;
            let conv = convention(c.as_deref())?;
            let [s1, s2, t1, t2] = numbers::<4>(point, "--point")?;
            let p = ChartPoint::new(s1, s2, t1, t2);
            let energies: Vec<_> = moyal_m3::lie::AlgebraElement::basis_all()
                .iter()
                .map(|u| {
                    let e = energy_with(u, &lambda, &conv);
                    let v = e.evaluate(&p);
                    json!({ "element": u.to_string(), "energy": e.expr.to_string(), "value": v.re })
                })
                .collect();
            json!({
                "command": "orbit chart",
                "lambda": lambda,
                "convention": conv.name,
                "point": p,
                "dual_coordinates": chart_to_functional_with(&p, &lambda, &conv),
                "dual_basis": ["X1*", "X2*", "X3*", "E1*", "E2*", "E3*"],
                "sphere_base": chart_base(t1, t2, &lambda),
                "energies": energies,
            })
        }
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

fn configure_threads() -> Result<(), UsageError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| UsageError(format!("{THREADS_ENV} must be a positive integer")))?;
        if n == 0 {
            return Err(UsageError(format!("{THREADS_ENV} must be a positive integer")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run() -> Result<bool, UsageError> {
    let (argv, tols) = take_tolerances(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            // --help and --version exit 0 through clap.
            std::process::exit(code);
        }
    };
    configure_threads()?;
    let suite = |a: &SuiteArgs, name: &str| run_suite(name, a, &tols);
    match &cli.command {
        Command::VerifyAlgebra(a) => suite(a, "verify-algebra"),
        Command::VerifyCovariance(a) => suite(a, "verify-covariance"),
        Command::VerifyRep(a) => suite(a, "verify-rep"),
        Command::VerifyPolarization(a) => suite(a, "verify-polarization"),
        Command::FourierCheck(a) => suite(a, "fourier-check"),
        Command::Orbit { action } => {
            println!("{}", orbit(action)?);
            Ok(true)
        }
        Command::StarEval { f, g, lambda, bivector, convention, out } => {
            emit(&star_eval(f, g, lambda, bivector, convention.as_deref())?, out.as_ref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `moyal-m3 --help` for usage");
            ExitCode::from(2)
        }
    }
}
