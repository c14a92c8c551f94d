//! Coordinate riemannian data on a chart: Christoffel maps, riemannian
//! hessians, orthonormal framings, second fundamental forms, boundary
//! convexity and barriers.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{Jet2, SymMat};
use crate::subeq::{asymptotic_interior_with_radius, AsymptoticOptions, AsymptoticVerdict, Subequation};

mod barrier;
pub mod tube;

pub use barrier::{barrier_jet, make_barrier, verify_barrier, Barrier, BarrierOptions, BarrierVerification};

/// Centered finite-difference step.
pub const H_FD: f64 = 1e-4;
/// Tube coordinates are used on `[TUBE_BAND, π/2 − TUBE_BAND]` only.
pub const TUBE_BAND: f64 = 1e-2;

pub type MetricFn = Arc<dyn Fn(&[f64]) -> SymMat + Send + Sync>;
pub type ChristoffelFn = Arc<dyn Fn(&[f64]) -> ChristoffelMap + Send + Sync>;

/// `Γ^k_ij`, stored as `gamma[k][i][j]` flattened.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelMap {
    n: usize,
    gamma: Vec<f64>,
}

impl ChristoffelMap {
    pub fn zeros(n: usize) -> Self {
        ChristoffelMap { n, gamma: vec![0.0; n * n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut gamma = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gamma[(k * n + i) * n + j] = f(k, i, j);
                }
            }
        }
        ChristoffelMap { n, gamma }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^k_ij`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.n + i) * self.n + j]
    }

    /// `Γ(p)_ij = Σ_k Γ^k_ij p_k`.
    pub fn apply(&self, p: &DVector<f64>) -> SymMat {
        let n = self.n;
        SymMat::from_fn(n, |i, j| (0..n).map(|k| self.get(k, i, j) * p[k]).sum())
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.iter().all(|v| *v == 0.0)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..i {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &ChristoffelMap) -> f64 {
        self.gamma.iter().zip(&other.gamma).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// A coordinate chart with metric `g(x)` on a box.
#[derive(Clone)]
pub struct MetricChart {
    name: String,
    n: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    g: MetricFn,
    analytic: Option<ChristoffelFn>,
    flat: bool,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart").field("name", &self.name).field("n", &self.n).field("lo", &self.lo).field("hi", &self.hi).finish()
    }
}

impl MetricChart {
    pub fn new(name: &str, lo: Vec<f64>, hi: Vec<f64>, g: impl Fn(&[f64]) -> SymMat + Send + Sync + 'static) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        let n = lo.len();
        if n == 0 || n > crate::jet::MAX_DIM {
            return Err(Error::Dimension(n));
        }
        Ok(MetricChart { name: name.to_string(), n, lo, hi, g: Arc::new(g), analytic: None, flat: false })
    }

    /// `g = I` on the box `[lo, hi]`.
    pub fn euclidean_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let n = lo.len();
        let mut out = MetricChart::new(&format!("euclidean({n})"), lo, hi, move |_| SymMat::identity(n))?;
        out.flat = true;
        Ok(out)
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::euclidean_box(vec![f64::NEG_INFINITY; n], vec![f64::INFINITY; n])
    }

    pub fn with_christoffel(mut self, gamma: impl Fn(&[f64]) -> ChristoffelMap + Send + Sync + 'static) -> Self {
        self.analytic = Some(Arc::new(gamma));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    /// Euclidean metric with vanishing Christoffel symbols.
    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn has_analytic_christoffel(&self) -> bool {
        self.analytic.is_some()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= l - 1e-12 && *v <= h + 1e-12)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        if !self.contains(x) {
            return Err(Error::OutsideChart(format!("{x:?} not in the box of {}", self.name)));
        }
        Ok(())
    }

    pub fn metric(&self, x: &[f64]) -> Result<SymMat> {
        self.check(x)?;
        Ok((self.g)(x))
    }

    /// The orthonormal frame `h = g^{-1/2}` used to express jets in `g`-unit coordinates.
    pub fn frame(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if self.flat {
            self.check(x)?;
            return Ok(DMatrix::identity(self.n, self.n));
        }
        let (_, inv_sqrt) = self.metric(x)?.sqrt_and_inv_sqrt()?;
        Ok(inv_sqrt.into_matrix())
    }
}

fn shifted(x: &[f64], i: usize, t: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += t;
    y
}

/// `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)` by centered differences.
pub fn christoffel_fd(metric: &MetricChart, x: &[f64]) -> Result<ChristoffelMap> {
    metric.check(x)?;
    let n = metric.n;
    if metric.flat {
        return Ok(ChristoffelMap::zeros(n));
    }
    let ginv = (metric.g)(x).as_matrix().clone().try_inverse().ok_or(Error::Singular("metric"))?;
    // dg[l] = ∂_l g
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|l| {
            let gp = (metric.g)(&shifted(x, l, H_FD));
            let gm = (metric.g)(&shifted(x, l, -H_FD));
            (gp.as_matrix() - gm.as_matrix()) / (2.0 * H_FD)
        })
        .collect();
    Ok(ChristoffelMap::from_fn(n, |k, i, j| {
        0.5 * (0..n).map(|l| ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])).sum::<f64>()
    }))
}

/// Analytic Christoffel symbols when the chart supplies them, finite differences otherwise.
pub fn christoffel(metric: &MetricChart, x: &[f64]) -> Result<ChristoffelMap> {
    match &metric.analytic {
        Some(f) => {
            metric.check(x)?;
            Ok(f(x))
        }
        None => christoffel_fd(metric, x),
    }
}

/// `max |∂_k g_ij − Σ_l (g_lj Γ^l_ki + g_il Γ^l_kj)|`, derivatives by centered differences.
pub fn metric_compatibility_residual(metric: &MetricChart, x: &[f64]) -> Result<f64> {
    let n = metric.n;
    let gam = christoffel(metric, x)?;
    let g = (metric.g)(x);
    let mut worst = 0.0f64;
    for k in 0..n {
        let d = ((metric.g)(&shifted(x, k, H_FD)).as_matrix() - (metric.g)(&shifted(x, k, -H_FD)).as_matrix()) / (2.0 * H_FD);
        for i in 0..n {
            for j in 0..n {
                let conn: f64 = (0..n).map(|l| g.get(l, j) * gam.get(l, k, i) + g.get(i, l) * gam.get(l, k, j)).sum();
                worst = worst.max((d[(i, j)] - conn).abs());
            }
        }
    }
    Ok(worst)
}

/// `(r, p, A) ↦ (r, p, A − Γ_x(p))`.
pub fn riemannian_hessian(metric: &MetricChart, x: &[f64], j: &Jet2) -> Result<Jet2> {
    if j.dim() != metric.n {
        return Err(Error::DimensionMismatch { expected: metric.n, got: j.dim() });
    }
    if metric.flat {
        metric.check(x)?;
        return Ok(j.clone());
    }
    let gam = christoffel(metric, x)?;
    Ok(Jet2 { r: j.r, p: j.p.clone(), a: &j.a - &gam.apply(&j.p) })
}

/// `(r, hp, hAhᵗ)`.
pub fn frame_transform_jet(j: &Jet2, h: &DMatrix<f64>) -> Result<Jet2> {
    let n = j.dim();
    if h.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, got: h.ncols() });
    }
    if h.clone().lu().determinant().abs() < 1e-300 {
        return Err(Error::Singular("frame"));
    }
    Ok(Jet2 { r: j.r, p: h * &j.p, a: j.a.congruence(h) })
}

/// Riemannian jet in the `g`-orthonormal frame `g^{-1/2}`: the jet a
/// universal subequation is evaluated on.
pub fn framed_jet(metric: &MetricChart, x: &[f64], coord_jet: &Jet2) -> Result<Jet2> {
    let rj = riemannian_hessian(metric, x, coord_jet)?;
    if metric.flat {
        return Ok(rj);
    }
    frame_transform_jet(&rj, &metric.frame(x)?)
}

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type CoordJetFn = Arc<dyn Fn(&[f64]) -> Jet2 + Send + Sync>;

/// `Ω = {ρ < 0}` with an optional analytic coordinate jet of `ρ`.
#[derive(Clone)]
pub struct DomainSpec {
    name: String,
    rho: ScalarFn,
    jet: Option<CoordJetFn>,
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainSpec").field("name", &self.name).field("analytic_jet", &self.jet.is_some()).finish()
    }
}

impl DomainSpec {
    pub fn from_fn(name: &str, rho: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        DomainSpec { name: name.to_string(), rho: Arc::new(rho), jet: None }
    }

    pub fn with_jet(mut self, jet: impl Fn(&[f64]) -> Jet2 + Send + Sync + 'static) -> Self {
        self.jet = Some(Arc::new(jet));
        self
    }

    /// `|x − c|² − R²`.
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        let c2 = center.clone();
        DomainSpec::from_fn(&format!("ball(R={radius})"), move |x| {
            x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() - radius * radius
        })
        .with_jet(move |x| {
            let d = DVector::from_iterator(x.len(), x.iter().zip(&c2).map(|(a, b)| a - b));
            Jet2 { r: d.norm_squared() - radius * radius, p: &d * 2.0, a: SymMat::identity(x.len()).scale(2.0) }
        })
    }

    /// `x_axis − offset`.
    pub fn half_space(n: usize, axis: usize, offset: f64) -> Self {
        DomainSpec::from_fn("half_space", move |x| x[axis] - offset).with_jet(move |x| {
            let mut p = DVector::zeros(n);
            p[axis] = 1.0;
            Jet2 { r: x[axis] - offset, p, a: SymMat::zeros(n) }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rho(&self, x: &[f64]) -> f64 {
        (self.rho)(x)
    }

    /// Coordinate 2-jet of `ρ`: analytic if supplied, centered differences otherwise.
    pub fn jet(&self, x: &[f64]) -> Jet2 {
        if let Some(j) = &self.jet {
            return j(x);
        }
        fd_jet(&*self.rho, x)
    }
}

/// Centered-difference 2-jet of a scalar function with step [`H_FD`].
pub fn fd_jet(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Jet2 {
    let n = x.len();
    let h = H_FD;
    let f0 = f(x);
    let mut p = DVector::zeros(n);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let fp = f(&shifted(x, i, h));
        let fm = f(&shifted(x, i, -h));
        p[i] = (fp - fm) / (2.0 * h);
        a[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let pp = f(&shifted(&shifted(x, i, h), j, h));
            let pm = f(&shifted(&shifted(x, i, h), j, -h));
            let mp = f(&shifted(&shifted(x, i, -h), j, h));
            let mm = f(&shifted(&shifted(x, i, -h), j, -h));
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Jet2 { r: f0, p, a: SymMat::symmetrize(a) }
}

/// Second fundamental form data at a boundary point, in the `g`-orthonormal frame.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    /// `|∇ρ|_g` before normalization.
    pub gradient_norm: f64,
    /// Outward unit normal in frame components.
    pub normal: DVector<f64>,
    /// Outward `g`-unit normal as a coordinate vector.
    pub normal_coord: DVector<f64>,
    /// Orthonormal basis of the tangent space (frame components), `n × (n−1)`.
    pub tangent: DMatrix<f64>,
    /// `II` on the tangent basis; the ball of radius `R` gets `I/R`.
    pub ii: SymMat,
    /// Framed riemannian jet of `ρ / |∇ρ|_g` (value entry 0).
    pub normalized_jet: Jet2,
}

impl BoundaryData {
    /// Projector onto the tangent space, frame components.
    pub fn tangent_projector(&self) -> SymMat {
        SymMat::symmetrize(&self.tangent * self.tangent.transpose())
    }

    pub fn ii_eigenvalues(&self) -> Vec<f64> {
        self.ii.eigenvalues().0
    }
}

pub fn second_fundamental_form(metric: &MetricChart, domain: &DomainSpec, x: &[f64]) -> Result<BoundaryData> {
    let n = metric.dim();
    let framed = framed_jet(metric, x, &domain.jet(x))?;
    let norm = framed.p.norm();
    if !(norm >= 1e-6) {
        return Err(Error::DegenerateGradient(norm));
    }
    let nu = &framed.p / norm;
    let hess = framed.a.scale(1.0 / norm);
    // complete ν to an orthonormal basis; the last n − 1 columns span ν⊥
    let mut cols = vec![nu.clone()];
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        cols.push(e);
    }
    let q = DMatrix::from_columns(&cols).qr().q();
    let tangent = q.columns(1, n - 1).into_owned();
    let normal_coord = metric.frame(x)? * &nu;
    Ok(BoundaryData {
        gradient_norm: norm,
        ii: hess.restrict(&tangent),
        normal_coord,
        tangent,
        normalized_jet: Jet2 { r: 0.0, p: nu.clone(), a: hess },
        normal: nu,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityVerdict {
    pub lambda: f64,
    pub verdict: AsymptoticVerdict,
}

#[derive(Clone, Debug)]
pub struct ConvexityOptions {
    /// Ladder `t = 2^k`, `0 ≤ k ≤ t_ladder_max`, on the normal direction.
    pub t_ladder_max: u32,
    pub min_suffix: usize,
    pub asymptotic: AsymptoticOptions,
}

impl Default for ConvexityOptions {
    fn default() -> Self {
        ConvexityOptions { t_ladder_max: 20, min_suffix: 4, asymptotic: AsymptoticOptions::default() }
    }
}

/// Strict `F_λ`-convexity of `∂Ω` at `x` for each `λ`: the framed normalized
/// jet of `ρ` plus `t νν ᵗ` must lie in the asymptotic interior of `F_λ`
/// for all large `t`.
pub fn boundary_convexity_test(
    f: &Subequation,
    metric: &MetricChart,
    domain: &DomainSpec,
    x: &[f64],
    lambdas: &[f64],
    opts: &ConvexityOptions,
) -> Result<Vec<ConvexityVerdict>> {
    if f.dim() != metric.dim() {
        return Err(Error::DimensionMismatch { expected: metric.dim(), got: f.dim() });
    }
    let bd = second_fundamental_form(metric, domain, x)?;
    let nn = SymMat::outer(&bd.normal);
    // neighborhood radius from the unshifted jet; scaling it with t would
    // swamp the tangential block at the top of the ladder
    let eta = opts.asymptotic.eta_scale * (1.0 + bd.normalized_jet.with_r(0.0).norm());
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let rungs: Vec<AsymptoticVerdict> = (0..=opts.t_ladder_max)
                .map(|k| {
                    let t = 2f64.powi(k as i32);
                    let j = Jet2 { r: lambda, p: bd.normal.clone(), a: &bd.normalized_jet.a + &nn.scale(t) };
                    asymptotic_interior_with_radius(f, x, lambda, &j, eta, &opts.asymptotic)
                })
                .collect();
            let suffix = rungs.iter().rev().take_while(|v| v.is_yes()).count();
            let verdict = if suffix >= opts.min_suffix.min(rungs.len()) {
                AsymptoticVerdict::Yes { t0: 2f64.powi((rungs.len() - suffix) as i32) }
            } else if matches!(rungs.last(), Some(AsymptoticVerdict::No)) {
                AsymptoticVerdict::No
            } else {
                AsymptoticVerdict::Undetermined
            };
            ConvexityVerdict { lambda, verdict }
        })
        .collect())
}

fn s3_tube_metric(x: &[f64]) -> SymMat {
    let (s, c) = x[0].sin_cos();
    SymMat::from_diagonal(&[1.0, c * c, s * s])
}

/// Analytic Christoffel symbols of `diag(1, cos²δ, sin²δ)`.
fn s3_tube_christoffel(x: &[f64]) -> ChristoffelMap {
    let (s, c) = x[0].sin_cos();
    let sc = s * c;
    ChristoffelMap::from_fn(3, |k, i, j| match (k, i, j) {
        (0, 1, 1) => sc,
        (0, 2, 2) => -sc,
        (1, 0, 1) | (1, 1, 0) => -s / c,
        (2, 0, 2) | (2, 2, 0) => c / s,
        _ => 0.0,
    })
}

fn tube_bounds() -> (Vec<f64>, Vec<f64>) {
    (vec![TUBE_BAND, 0.0, 0.0], vec![FRAC_PI_2 - TUBE_BAND, 2.0 * PI, 2.0 * PI])
}

/// Charts by name: `euclidean(n)` (also `euclidean:n=<n>`), `s3_tube`, `s3xs3_tube`.
pub fn builtin_metric(name: &str) -> Result<MetricChart> {
    let name = name.trim();
    let parse_n = |s: &str| s.trim().parse::<usize>().map_err(|_| Error::params("metric", format!("bad dimension in `{name}`")));
    if let Some(rest) = name.strip_prefix("euclidean") {
        let n = if let Some(inner) = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            parse_n(inner)?
        } else if let Some(v) = rest.strip_prefix(":n=") {
            parse_n(v)?
        } else {
            return Err(Error::params("metric", format!("expected euclidean(n), got `{name}`")));
        };
        if n == 0 || n > crate::jet::MAX_DIM {
            return Err(Error::Dimension(n));
        }
        return MetricChart::euclidean(n);
    }
    match name {
        "s3_tube" => {
            let (lo, hi) = tube_bounds();
            Ok(MetricChart::new("s3_tube", lo, hi, s3_tube_metric)?.with_christoffel(s3_tube_christoffel))
        }
        "s3xs3_tube" => {
            let (lo, hi) = tube_bounds();
            let lo = [lo.clone(), lo].concat();
            let hi = [hi.clone(), hi].concat();
            let g = |x: &[f64]| {
                let (a, b) = (s3_tube_metric(&x[..3]), s3_tube_metric(&x[3..]));
                SymMat::from_fn(6, |i, j| match (i < 3, j < 3) {
                    (true, true) => a.get(i, j),
                    (false, false) => b.get(i - 3, j - 3),
                    _ => 0.0,
                })
            };
            let gam = |x: &[f64]| {
                let (a, b) = (s3_tube_christoffel(&x[..3]), s3_tube_christoffel(&x[3..]));
                ChristoffelMap::from_fn(6, |k, i, j| match (k < 3, i < 3, j < 3) {
                    (true, true, true) => a.get(k, i, j),
                    (false, false, false) => b.get(k - 3, i - 3, j - 3),
                    _ => 0.0,
                })
            };
            Ok(MetricChart::new("s3xs3_tube", lo, hi, g)?.with_christoffel(gam))
        }
        _ => Err(Error::UnknownEntry(name.to_string())),
    }
}
