//! Command dispatch. Every command produces one JSON document and an exit code.

use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Value};
use subeq::geometry::{
    boundary_convexity_test, builtin_metric, fd_jet, make_barrier, verify_barrier, BarrierOptions, ConvexityOptions, DomainSpec,
    MetricChart,
};
use subeq::jet::random;
use subeq::solver::harness::{tube_counterexample_harness, TubeHarnessOptions};
use subeq::solver::{perron_solve, sums_probe, Grid, GridFunction, SolveConfig, SweepMode};
use subeq::subeq::{catalog_construct, catalog_entries, dual, AsymptoticOptions, AsymptoticVerdict, Subequation};
use subeq::Error;

use crate::config::{Command, RunConfig};
use crate::expr::{parse_expr, Expr};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Result of one command: exit code, JSON report, optional CSV artifact.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub csv: Option<String>,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence(_) | Error::BarrierFailed(_) => EXIT_UNDECIDED,
        Error::GardingRoots { .. } | Error::Singular(_) | Error::NonMonotone { .. } => EXIT_INTERNAL,
        _ => EXIT_CONFIG,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

type Res<T> = Result<T, Failure>;

fn need<'a, T>(v: &'a Option<T>, key: &str) -> Res<&'a T> {
    v.as_ref().ok_or_else(|| Failure::config(format!("`{key}` is required for this command")))
}

fn expr(text: &str, key: &str, n: usize) -> Res<Arc<Expr>> {
    let e = parse_expr(text).map_err(|e| Failure::config(format!("{key}: {e}")))?;
    if e.arity() > n {
        return Err(Failure::config(format!("{key}: uses x{} but the dimension is {n}", e.arity())));
    }
    Ok(Arc::new(e))
}

fn subequation(cfg: &RunConfig) -> Res<Subequation> {
    Ok(catalog_construct(need(&cfg.subequation, "subequation")?)?)
}

fn metric(cfg: &RunConfig, n: usize) -> Res<MetricChart> {
    let m = match &cfg.metric {
        Some(name) => builtin_metric(name)?,
        None => MetricChart::euclidean(n)?,
    };
    if m.dim() != n {
        return Err(Failure::config(format!("metric has dimension {}, subequation {n}", m.dim())));
    }
    Ok(m)
}

fn domain(cfg: &RunConfig, n: usize) -> Res<Option<DomainSpec>> {
    match &cfg.domain {
        None => Ok(None),
        Some(text) => {
            let e = expr(text, "domain", n)?;
            Ok(Some(DomainSpec::from_fn(text, move |x| e.eval(x))))
        }
    }
}

fn bbox(cfg: &RunConfig, n: usize) -> Res<(Vec<f64>, Vec<f64>)> {
    let b = need(&cfg.bbox, "box")?;
    if b.len() != n {
        return Err(Failure::config(format!("box has {} axes, dimension is {n}", b.len())));
    }
    Ok((b.iter().map(|p| p.0).collect(), b.iter().map(|p| p.1).collect()))
}

fn grid(cfg: &RunConfig, n: usize, dom: Option<&DomainSpec>) -> Res<Grid> {
    let (lo, hi) = bbox(cfg, n)?;
    let res = cfg.resolution.unwrap_or(33);
    Ok(Grid::new(&lo, &hi, &vec![res; n], dom)?)
}

fn verdict_label(v: &AsymptoticVerdict) -> &'static str {
    match v {
        AsymptoticVerdict::Yes { .. } => "yes",
        AsymptoticVerdict::No => "no",
        AsymptoticVerdict::Undetermined => "undetermined",
    }
}

pub fn run(cfg: &RunConfig) -> Res<Outcome> {
    match cfg.command {
        Command::Solve => solve(cfg),
        Command::Convexity => convexity(cfg),
        Command::DualCheck => dual_check(cfg),
        Command::Barrier => barrier(cfg),
        Command::Counterexample => counterexample(cfg),
        Command::SumsProbe => sums(cfg),
        Command::Catalog => catalog(),
    }
}

fn solve(cfg: &RunConfig) -> Res<Outcome> {
    let f = subequation(cfg)?;
    let n = f.dim();
    let m = metric(cfg, n)?;
    let dom = domain(cfg, n)?;
    let g = grid(cfg, n, dom.as_ref())?;
    let phi_e = expr(need(&cfg.boundary, "boundary")?, "boundary", n)?;
    let phi = GridFunction::from_fn(&g, |x| phi_e.eval(x));
    let defaults = SolveConfig::default();
    let mode = match cfg.mode.as_deref() {
        None | Some("sequential") => SweepMode::Sequential,
        Some("parallel") => SweepMode::ParallelJacobi,
        Some(other) => return Err(Failure::config(format!("mode: expected sequential or parallel, got `{other}`"))),
    };
    let sc = SolveConfig {
        tol_iter: cfg.tol_iter.unwrap_or(defaults.tol_iter),
        tol_residual: cfg.tol_residual.unwrap_or(defaults.tol_residual),
        max_sweeps: cfg.max_sweeps.unwrap_or(defaults.max_sweeps),
        relaxation: cfg.relaxation.unwrap_or(defaults.relaxation),
        mode,
        ..defaults
    };
    let (u, report, code) = match perron_solve(&f, &m, &g, &phi, &sc) {
        Ok((u, r)) => (u, r, EXIT_OK),
        Err(Error::NonConvergence(b)) => {
            let (u, r) = *b;
            (u, r, EXIT_UNDECIDED)
        }
        Err(e) => return Err(e.into()),
    };
    let mut rep = serde_json::to_value(&report).expect("report serializes");
    rep["command"] = json!("solve");
    rep["subequation"] = json!(f.name());
    Ok(Outcome { code, report: rep, csv: Some(u.to_csv()) })
}

/// Newton projection of `x` onto `{ρ = 0}` along the gradient.
fn project_to_boundary(dom: &DomainSpec, x: &mut [f64]) -> bool {
    for _ in 0..60 {
        let j = fd_jet(&|y: &[f64]| dom.rho(y), x);
        if j.r.abs() <= 1e-13 {
            return true;
        }
        let g2 = j.p.norm_squared();
        if !(g2 > 1e-20) {
            return false;
        }
        for (xi, pi) in x.iter_mut().zip(j.p.iter()) {
            *xi -= j.r * pi / g2;
        }
    }
    dom.rho(x).abs() <= 1e-10
}

fn convexity(cfg: &RunConfig) -> Res<Outcome> {
    let f = subequation(cfg)?;
    let n = f.dim();
    let m = metric(cfg, n)?;
    let dom = domain(cfg, n)?.ok_or_else(|| Failure::config("`domain` is required for this command"))?;
    let (lo, hi) = bbox(cfg, n)?;
    let lambdas = cfg.lambdas.clone().unwrap_or_else(|| vec![-1.0, 0.0, 1.0]);
    let seed = cfg.seed.unwrap_or(0);
    let count = cfg.samples.unwrap_or(8);
    let mut rng = random::rng(seed);
    let opts = ConvexityOptions { asymptotic: AsymptoticOptions { seed, ..Default::default() }, ..Default::default() };
    let mut points = Vec::new();
    let (mut yes, mut no, mut und) = (0usize, 0usize, 0usize);
    let mut attempts = 0;
    while points.len() < count && attempts < 100 * count.max(1) {
        attempts += 1;
        let mut x: Vec<f64> = (0..n).map(|i| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>()).collect();
        if !project_to_boundary(&dom, &mut x) || !m.contains(&x) {
            continue;
        }
        let verdicts = boundary_convexity_test(&f, &m, &dom, &x, &lambdas, &opts)?;
        let vs: Vec<Value> = verdicts
            .iter()
            .map(|v| {
                match v.verdict {
                    AsymptoticVerdict::Yes { .. } => yes += 1,
                    AsymptoticVerdict::No => no += 1,
                    AsymptoticVerdict::Undetermined => und += 1,
                }
                let t0 = match v.verdict {
                    AsymptoticVerdict::Yes { t0 } => json!(t0),
                    _ => Value::Null,
                };
                json!({"lambda": v.lambda, "verdict": verdict_label(&v.verdict), "t0": t0})
            })
            .collect();
        points.push(json!({"x": x, "verdicts": vs}));
    }
    if points.is_empty() {
        return Err(Failure::config("no boundary points found inside the box"));
    }
    let code = if no == 0 && und == 0 { EXIT_OK } else { EXIT_UNDECIDED };
    Ok(Outcome {
        code,
        report: json!({
            "command": "convexity",
            "subequation": f.name(),
            "seed": seed,
            "points": points,
            "verdicts": {"yes": yes, "no": no, "undetermined": und},
        }),
        csv: None,
    })
}

fn dual_check(cfg: &RunConfig) -> Res<Outcome> {
    let f = subequation(cfg)?;
    let n = f.dim();
    let seed = cfg.seed.unwrap_or(0);
    let samples = cfg.samples.unwrap_or(1000);
    let slack = if f.flags.approximate { 1e-6 } else { 1e-9 };
    let x = vec![0.0; n];
    let dd = dual(&dual(&f));
    let fd = dual(&f);
    let mut rng = random::rng(seed);
    let (mut p_worst, mut n_worst) = (0.0f64, 0.0f64);
    let (mut agree, mut compared, mut bitwise) = (0usize, 0usize, true);
    for _ in 0..samples {
        let j = random::jet(n, &mut rng);
        let m0 = f.margin(&x, &j);
        let psd = random::psd(n, &mut rng);
        let jp = subeq::jet::Jet2 { a: &j.a + &psd, ..j.clone() };
        p_worst = p_worst.max(m0 - f.margin(&x, &jp));
        let s = rng.random::<f64>();
        n_worst = n_worst.max(m0 - f.margin(&x, &j.with_r(j.r - s)));
        if dd.margin(&x, &j).to_bits() != m0.to_bits() && !m0.is_nan() {
            bitwise = false;
        }
        let neg = f.negation_margin(&x, &j);
        if neg.abs() > 1e-6 {
            compared += 1;
            if (neg > 0.0) == (fd.margin(&x, &j) > 0.0) {
                agree += 1;
            }
        }
    }
    let positivity = p_worst <= slack;
    let negativity = n_worst <= slack;
    let coherent = agree == compared;
    let code = if positivity && negativity && coherent && bitwise { EXIT_OK } else { EXIT_UNDECIDED };
    Ok(Outcome {
        code,
        report: json!({
            "command": "dual-check",
            "subequation": f.name(),
            "dual": f.dual_name(),
            "seed": seed,
            "samples": samples,
            "positivity_worst_drop": p_worst,
            "negativity_worst_drop": n_worst,
            "duality_agreement": agree,
            "duality_compared": compared,
            "verdicts": {
                "positivity": positivity,
                "negativity": negativity,
                "duality_coherence": coherent,
                "double_dual_identity": bitwise,
            },
        }),
        csv: None,
    })
}

fn barrier(cfg: &RunConfig) -> Res<Outcome> {
    let f = subequation(cfg)?;
    let n = f.dim();
    let m = metric(cfg, n)?;
    let dom = domain(cfg, n)?.ok_or_else(|| Failure::config("`domain` is required for this command"))?;
    let x0 = need(&cfg.x0, "x0")?.clone();
    if x0.len() != n {
        return Err(Failure::config(format!("x0 has {} entries, dimension is {n}", x0.len())));
    }
    let lambda = cfg.lambdas.as_ref().and_then(|l| l.first().copied()).unwrap_or(0.0);
    let seed = cfg.seed.unwrap_or(0);
    let opts = BarrierOptions { samples: cfg.samples.unwrap_or(1000), seed, ..Default::default() };
    match make_barrier(&f, &m, &dom, &x0, lambda, &opts) {
        Ok(b) => {
            let check = verify_barrier(&f, &m, &dom, &x0, &b, opts.c, opts.samples, seed.wrapping_add(1))?;
            let code = if check.passed { EXIT_OK } else { EXIT_UNDECIDED };
            Ok(Outcome {
                code,
                report: json!({
                    "command": "barrier",
                    "subequation": f.name(),
                    "seed": seed,
                    "barrier": b,
                    "reverification": check,
                    "verdicts": {"found": true, "reverified": check.passed},
                }),
                csv: None,
            })
        }
        Err(Error::BarrierFailed(msg)) => Ok(Outcome {
            code: EXIT_UNDECIDED,
            report: json!({
                "command": "barrier",
                "subequation": f.name(),
                "seed": seed,
                "failure": msg,
                "verdicts": {"found": false},
            }),
            csv: None,
        }),
        Err(e) => Err(e.into()),
    }
}

fn counterexample(cfg: &RunConfig) -> Res<Outcome> {
    let c = cfg.c.unwrap_or(0.5);
    let defaults = TubeHarnessOptions::default();
    let opts = TubeHarnessOptions {
        h: cfg.h.unwrap_or(defaults.h),
        samples: cfg.samples.unwrap_or(defaults.samples),
        seed: cfg.seed.unwrap_or(0),
        sums_eps: cfg.epsilons.clone().unwrap_or(defaults.sums_eps.clone()),
        ..defaults
    };
    let r = tube_counterexample_harness(c, &opts)?;
    let violated = r.zmp.verdict == subeq::solver::ZmpVerdict::Violation;
    let mut rep = serde_json::to_value(&r).expect("report serializes");
    rep["command"] = json!("counterexample");
    rep["seed"] = json!(opts.seed);
    rep["verdicts"] = json!({
        "zmp_violated": violated,
        "signature_all": r.signature_matches == r.samples,
    });
    Ok(Outcome { code: if violated { EXIT_OK } else { EXIT_UNDECIDED }, report: rep, csv: None })
}

fn sums(cfg: &RunConfig) -> Res<Outcome> {
    let b = need(&cfg.bbox, "box")?;
    let n = b.len();
    let dom = domain(cfg, n)?;
    let g = grid(cfg, n, dom.as_ref())?;
    let ue = expr(need(&cfg.u, "u")?, "u", n)?;
    let ve = expr(need(&cfg.v, "v")?, "v", n)?;
    let u = GridFunction::from_fn(&g, |x| ue.eval(x));
    let v = GridFunction::from_fn(&g, |x| ve.eval(x));
    let eps = cfg.epsilons.clone().unwrap_or_else(|| vec![1.0, 0.1, 0.01, 0.001]);
    let r = sums_probe(&u, &v, &g, &eps)?;
    let mut rep = serde_json::to_value(&r).expect("report serializes");
    rep["command"] = json!("sums-probe");
    rep["verdicts"] = json!({"applicable": r.applicable, "monotone": r.monotone, "penalty_trend": r.penalty_trend});
    let code = if !r.applicable || (r.monotone && r.penalty_trend) { EXIT_OK } else { EXIT_UNDECIDED };
    Ok(Outcome { code, report: rep, csv: None })
}

fn catalog() -> Res<Outcome> {
    let entries: Vec<Value> =
        catalog_entries().into_iter().map(|(name, template, cond)| json!({"name": name, "template": template, "condition": cond})).collect();
    Ok(Outcome { code: EXIT_OK, report: json!({"command": "catalog", "entries": entries}), csv: None })
}
