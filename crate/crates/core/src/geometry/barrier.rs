//! Barriers `β(x) = λ + C(ρ(x) − ε|x − x₀|²/2)` near a boundary point.

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use super::{boundary_convexity_test, framed_jet, ConvexityOptions, DomainSpec, MetricChart};
use crate::error::{Error, Result};
use crate::jet::random::{self, Rng64};
use crate::jet::{Jet2, SymMat};
use crate::subeq::{c_strict_contains, StrictVerdict, Subequation};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Barrier {
    pub lambda: f64,
    pub c_scale: f64,
    pub eps: f64,
    pub r0: f64,
}

#[derive(Clone, Debug)]
pub struct BarrierOptions {
    pub samples: usize,
    /// Strictness radius in the jet fiber.
    pub c: f64,
    /// Largest `k` in `ε, r₀ ∈ {0.1 · 2^{−k}}`.
    pub max_halvings: u32,
    /// Largest `k` in `C ∈ {2^k}`.
    pub max_doublings: u32,
    pub seed: u64,
    pub convexity: ConvexityOptions,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            samples: 1000,
            c: 1e-6,
            max_halvings: 10,
            max_doublings: 30,
            seed: 0,
            convexity: ConvexityOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierVerification {
    pub passed: bool,
    pub samples: usize,
    /// Smallest `margin / L` over the samples.
    pub min_scaled_margin: f64,
    pub worst_point: Vec<f64>,
}

/// Coordinate jet of `β` at `x`.
pub fn barrier_jet(domain: &DomainSpec, x0: &[f64], b: &Barrier, x: &[f64]) -> Jet2 {
    let n = x.len();
    let rj = domain.jet(x);
    let d = DVector::from_iterator(n, x.iter().zip(x0).map(|(a, c)| a - c));
    Jet2 {
        r: b.lambda + b.c_scale * (rj.r - 0.5 * b.eps * d.norm_squared()),
        p: (&rj.p - &d * b.eps) * b.c_scale,
        a: (&rj.a - &SymMat::identity(n).scale(b.eps)).scale(b.c_scale),
    }
}

/// Points of `B(x₀, r₀) ∩ {ρ ≤ 0}` inside the chart box.
fn sample_points(metric: &MetricChart, domain: &DomainSpec, x0: &[f64], r0: f64, count: usize, rng: &mut Rng64) -> Vec<Vec<f64>> {
    let n = x0.len();
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count && tries < 200 * count {
        tries += 1;
        let u = random::unit_vector(n, rng);
        let rad = r0 * rng.random::<f64>().powf(1.0 / n as f64);
        let x: Vec<f64> = (0..n).map(|i| x0[i] + rad * u[i]).collect();
        if domain.rho(&x) <= 0.0 && metric.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Checks `c`-strictness of `β` at `samples` fresh points of `B(x₀, r₀) ∩ Ω̄`.
pub fn verify_barrier(
    f: &Subequation,
    metric: &MetricChart,
    domain: &DomainSpec,
    x0: &[f64],
    b: &Barrier,
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<BarrierVerification> {
    let l = f.lipschitz().ok_or_else(|| Error::MissingLipschitz(f.name().to_string()))?;
    let mut rng = random::rng(seed);
    let pts = sample_points(metric, domain, x0, b.r0, samples, &mut rng);
    if pts.len() < samples {
        return Err(Error::BarrierFailed(format!("only {} of {samples} sample points fall in the domain", pts.len())));
    }
    let mut worst = (f64::INFINITY, x0.to_vec());
    let mut passed = true;
    for x in pts {
        let j = framed_jet(metric, &x, &barrier_jet(domain, x0, b, &x))?;
        let m = f.margin(&x, &j) / l;
        if m < worst.0 || m.is_nan() {
            worst = (m, x.clone());
        }
        if !matches!(c_strict_contains(f, &x, &j, c, seed)?, StrictVerdict::Certified) {
            passed = false;
        }
    }
    Ok(BarrierVerification { passed, samples, min_scaled_margin: worst.0, worst_point: worst.1 })
}

/// Searches `r₀, ε ∈ {0.1 · 2^{−k}}` (largest first) and `C ∈ {2^k}` (smallest
/// first) for a barrier that is `c`-strict at the sampled points for both `C`
/// and `2C`. Requires strict `F_{λ+1}`-convexity of the boundary at `x₀`.
pub fn make_barrier(
    f: &Subequation,
    metric: &MetricChart,
    domain: &DomainSpec,
    x0: &[f64],
    lambda: f64,
    opts: &BarrierOptions,
) -> Result<Barrier> {
    let pre = boundary_convexity_test(f, metric, domain, x0, &[lambda + 1.0], &opts.convexity)?;
    if !pre[0].verdict.is_yes() {
        return Err(Error::BarrierFailed(format!(
            "boundary is not strictly convex for lambda' = {} at x0 ({:?})",
            lambda + 1.0,
            pre[0].verdict
        )));
    }
    f.lipschitz().ok_or_else(|| Error::MissingLipschitz(f.name().to_string()))?;
    let mut best_seen = f64::NEG_INFINITY;
    for kr in 0..=opts.max_halvings {
        let r0 = 0.1 * 2f64.powi(-(kr as i32));
        for ke in 0..=opts.max_halvings {
            let eps = 0.1 * 2f64.powi(-(ke as i32));
            for kc in 0..=opts.max_doublings {
                let b = Barrier { lambda, c_scale: 2f64.powi(kc as i32), eps, r0 };
                let v1 = verify_barrier(f, metric, domain, x0, &b, opts.c, opts.samples, opts.seed)?;
                best_seen = best_seen.max(v1.min_scaled_margin);
                if !v1.passed {
                    continue;
                }
                let b2 = Barrier { c_scale: 2.0 * b.c_scale, ..b };
                if verify_barrier(f, metric, domain, x0, &b2, opts.c, opts.samples, opts.seed)?.passed {
                    return Ok(b);
                }
            }
        }
    }
    Err(Error::BarrierFailed(format!("search exhausted; best scaled margin {best_seen:e}")))
}
