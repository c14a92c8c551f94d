//! Sampled and certified tests on subequations: strictness, asymptotic
//! interior, eigenvalue graphs, monotonicity cones.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use super::{MarginFn, Subequation};
use crate::error::{Error, Result};
use crate::jet::random::{self, Rng64};
use crate::jet::{Jet2, SymMat};

#[derive(Clone, Debug, PartialEq)]
pub enum StrictVerdict {
    /// `margin / L ≥ c`, so the closed `c`-ball about `J` lies in `F_x`.
    Certified,
    /// A point at distance `c` from `J` outside `F_x`.
    Violated(Jet2),
    /// Neither certified nor falsified by the probe.
    Inconclusive,
}

impl StrictVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, StrictVerdict::Certified)
    }
}

/// `c`-strictness of `J` in `F_x`: Lipschitz certificate, then a 64-direction
/// falsification probe at radius `c`.
pub fn c_strict_contains(f: &Subequation, x: &[f64], j: &Jet2, c: f64, seed: u64) -> Result<StrictVerdict> {
    let l = f.lipschitz().ok_or_else(|| Error::MissingLipschitz(f.name().to_string()))?;
    let m = f.margin(x, j);
    if m / l >= c {
        return Ok(StrictVerdict::Certified);
    }
    let n = j.dim();
    let mut dirs = Vec::with_capacity(64);
    dirs.push(Jet2::pure(SymMat::identity(n).scale(-1.0 / (n as f64).sqrt())));
    dirs.push(Jet2 { r: 1.0, p: DVector::zeros(n), a: SymMat::zeros(n) });
    let mut rng = random::rng(seed);
    while dirs.len() < 64 {
        dirs.push(random::unit_jet(n, &mut rng));
    }
    for d in dirs {
        let probe = j.axpy(c, &d);
        if f.margin(x, &probe) < 0.0 {
            return Ok(StrictVerdict::Violated(probe));
        }
    }
    Ok(StrictVerdict::Inconclusive)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AsymptoticVerdict {
    Yes { t0: f64 },
    No,
    Undetermined,
}

impl AsymptoticVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, AsymptoticVerdict::Yes { .. })
    }
}

#[derive(Clone, Debug)]
pub struct AsymptoticOptions {
    /// Ladder `t = 2^k`, `0 ≤ k ≤ ladder_max`.
    pub ladder_max: u32,
    pub samples: usize,
    /// Neighborhood radius `η = eta_scale · (1 + |J|)`.
    pub eta_scale: f64,
    /// Number of consecutive passing rungs at the top of the ladder needed for `Yes`.
    pub min_suffix: usize,
    pub seed: u64,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions { ladder_max: 20, samples: 128, eta_scale: 1e-2, min_suffix: 4, seed: 0 }
    }
}

/// Is the reduced jet `J` (its `r` entry ignored) in the asymptotic interior of
/// `F_λ = {J : (λ, p, A) ∈ F}`?
///
/// Cone entries with no `r` dependence are decided exactly (`margin > 0`).
/// Otherwise a fixed sample of neighbors `N(J)` is scaled along the `t`-ladder;
/// `Yes(t₀)` when every rung from `t₀` to the top admits all samples.
pub fn asymptotic_interior_contains(
    f: &Subequation,
    x: &[f64],
    lambda: f64,
    j: &Jet2,
    opts: &AsymptoticOptions,
) -> AsymptoticVerdict {
    let eta = opts.eta_scale * (1.0 + j.with_r(0.0).norm());
    asymptotic_interior_with_radius(f, x, lambda, j, eta, opts)
}

/// [`asymptotic_interior_contains`] with an explicit neighborhood radius.
pub fn asymptotic_interior_with_radius(
    f: &Subequation,
    x: &[f64],
    lambda: f64,
    j: &Jet2,
    eta: f64,
    opts: &AsymptoticOptions,
) -> AsymptoticVerdict {
    let base = j.with_r(lambda);
    if f.flags.cone && f.flags.reduced {
        return if f.margin(x, &base) > 0.0 { AsymptoticVerdict::Yes { t0: 1.0 } } else { AsymptoticVerdict::No };
    }
    let n = j.dim();
    let red = j.with_r(0.0);
    let mut rng = random::rng(opts.seed);
    let dof = (n + n * (n + 1) / 2) as f64;
    let mut nbrs = vec![red.clone()];
    while nbrs.len() < opts.samples.max(1) {
        let mut d = random::unit_jet(n, &mut rng).with_r(0.0);
        let l = d.norm();
        if l < 1e-8 {
            continue;
        }
        d = d.scale(1.0 / l);
        let rad = eta * rng.random::<f64>().powf(1.0 / dof);
        nbrs.push(red.axpy(rad, &d));
    }
    let mut passes = Vec::with_capacity(opts.ladder_max as usize + 1);
    for k in 0..=opts.ladder_max {
        let t = 2f64.powi(k as i32);
        let ok = nbrs.iter().all(|nb| {
            let jt = nb.scale(t).with_r(lambda);
            f.margin(x, &jt) >= 0.0
        });
        passes.push(ok);
    }
    let suffix = passes.iter().rev().take_while(|&&p| p).count();
    if suffix == 0 {
        AsymptoticVerdict::No
    } else if suffix >= opts.min_suffix {
        let k0 = passes.len() - suffix;
        AsymptoticVerdict::Yes { t0: 2f64.powi(k0 as i32) }
    } else {
        AsymptoticVerdict::Undetermined
    }
}

/// `f(μ) = inf{t : margin(diag(μ) + tI) ≥ 0}` for an eigenvalue entry.
pub fn eigen_boundary_graph(f: &Subequation, mu: &[f64]) -> Result<f64> {
    if !(f.flags.pure_second_order && f.flags.eigen_symmetric) {
        return Err(Error::params(f.name(), "eigen_boundary_graph needs a pure eigenvalue entry"));
    }
    if mu.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: mu.len() });
    }
    let x = vec![0.0; f.dim()];
    let d = SymMat::from_diagonal(mu);
    let g = |t: f64| f.margin(&x, &Jet2::pure(d.add_identity(t)));
    let (mut lo, mut hi) = (-1.0, 1.0);
    while g(lo) >= 0.0 {
        lo *= 2.0;
        if lo < -1e8 {
            return Err(Error::Unbounded);
        }
    }
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::EmptyFiber);
        }
    }
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub type JetSampler = Arc<dyn Fn(&mut Rng64) -> Jet2 + Send + Sync>;

/// A monotonicity set `M` (typically a convex cone) with a sampler of its points.
#[derive(Clone)]
pub struct MonotoneSet {
    pub name: String,
    pub dim: usize,
    margin: MarginFn,
    sampler: JetSampler,
    pub convex_cone: bool,
}

impl MonotoneSet {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        margin: impl Fn(&[f64], &Jet2) -> f64 + Send + Sync + 'static,
        sampler: impl Fn(&mut Rng64) -> Jet2 + Send + Sync + 'static,
        convex_cone: bool,
    ) -> Self {
        MonotoneSet { name: name.into(), dim, margin: Arc::new(margin), sampler: Arc::new(sampler), convex_cone }
    }

    /// `{(0, 0, P) : P ⪰ 0}`.
    pub fn psd_cone(n: usize) -> Self {
        MonotoneSet::new(
            "P",
            n,
            |_, j| j.a.min_eigenvalue().min(-j.r.abs()).min(-j.p.norm()),
            move |rng| Jet2::pure(random::psd(n, rng)),
            true,
        )
    }

    /// `R₋ × {0} × P`.
    pub fn negative_psd_cone(n: usize) -> Self {
        MonotoneSet::new(
            "N+P",
            n,
            |_, j| j.a.min_eigenvalue().min(-j.r).min(-j.p.norm()),
            move |rng| {
                let mut j = Jet2::pure(random::psd(n, rng));
                j.r = -random::normal(rng).abs();
                j
            },
            true,
        )
    }

    /// The circular cone `C_γ(J_c)`.
    pub fn circular(jc: Jet2, gamma: f64) -> Self {
        let n = jc.dim();
        let (ja, jb) = (jc.clone(), jc);
        MonotoneSet::new(
            format!("C_{gamma}"),
            n,
            move |_, j| super::catalog::circular_margin(&ja, gamma, j),
            move |rng| {
                let t = 2.0 * rng.random::<f64>();
                let mut d = random::unit_jet(n, rng);
                let nn = jb.norm_squared();
                d = d.axpy(-d.inner(&jb) / nn, &jb);
                let l = d.norm();
                let rad = if l > 1e-12 { t / gamma * rng.random::<f64>() / l } else { 0.0 };
                jb.scale(t).axpy(rad, &d)
            },
            true,
        )
    }

    pub fn margin(&self, x: &[f64], j: &Jet2) -> f64 {
        (self.margin)(x, j)
    }

    pub fn sample(&self, rng: &mut Rng64) -> Jet2 {
        (self.sampler)(rng)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub samples: usize,
    pub min_margin: f64,
    pub pass: bool,
}

/// Moves `j` along `(−1, 0, I)` to the boundary of `F_x`; falls back to
/// shrinking toward the origin for entries that ignore `r` and `A`.
pub(crate) fn push_to_boundary(f: &Subequation, x: &[f64], j: &Jet2) -> Option<Jet2> {
    let n = j.dim();
    let dir = Jet2 { r: -1.0, p: DVector::zeros(n), a: SymMat::identity(n) };
    let g = |s: f64| f.margin(x, &j.axpy(s, &dir));
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut ok = true;
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            ok = false;
            break;
        }
    }
    if ok {
        while g(lo) >= 0.0 {
            lo *= 2.0;
            if lo < -1e6 {
                ok = false;
                break;
            }
        }
    }
    if ok {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Some(j.axpy(hi, &dir));
    }
    let mut s = 1.0;
    for _ in 0..60 {
        let cand = j.scale(s);
        if f.margin(x, &cand) >= 0.0 {
            return Some(cand);
        }
        s *= 0.5;
    }
    None
}

/// Draws `J` near `∂F_x` and `J_M ∈ M`; reports `min margin(J + J_M)`.
pub fn monotonicity_check(f: &Subequation, m: &MonotoneSet, x: &[f64], samples: usize, seed: u64) -> MonotonicityReport {
    let mut rng = random::rng(seed);
    let n = f.dim();
    let mut min = f64::INFINITY;
    let mut used = 0;
    let mut tries = 0;
    while used < samples && tries < 10 * samples.max(1) {
        tries += 1;
        let j = random::jet(n, &mut rng);
        let Some(jb) = push_to_boundary(f, x, &j) else { continue };
        let jm = m.sample(&mut rng);
        min = min.min(f.margin(x, &(&jb + &jm)));
        used += 1;
    }
    MonotonicityReport { samples: used, min_margin: min, pass: used > 0 && min >= -1e-8 }
}

/// Fraction of sampled boundary points that have an interior point within
/// `1e−6` along `(−1, 0, I)`. Diagnostic only.
pub fn t_condition_probe(f: &Subequation, x: &[f64], samples: usize, seed: u64) -> f64 {
    let mut rng = random::rng(seed);
    let n = f.dim();
    let dir = Jet2 { r: -1.0, p: DVector::zeros(n), a: SymMat::identity(n) };
    let (mut hit, mut total) = (0usize, 0usize);
    for _ in 0..samples {
        let j = random::jet(n, &mut rng);
        if let Some(jb) = push_to_boundary(f, x, &j) {
            total += 1;
            if f.margin(x, &jb.axpy(1e-6, &dir)) > 0.0 {
                hit += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}
