//! Discrete jets on lattices, the jet-level subharmonicity test, and a
//! Perron-style nonlinear Gauss–Seidel solver for the Dirichlet problem.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{christoffel, ChristoffelMap, MetricChart};
use crate::jet::{Jet2, SymMat};
use crate::subeq::{dual, Subequation};

mod checks;
mod grid;
pub mod harness;

pub use checks::{comparison_check, sums_probe, zmp_check, ComparisonReport, SumsRecord, SumsReport, ZmpReport, ZmpVerdict};
pub use grid::{Grid, GridFunction, NodeKind};

/// Coordinate second differences at an interior node, center value included.
fn coordinate_jet(u: &[f64], grid: &Grid, node: usize) -> Jet2 {
    let n = grid.dim();
    let h = grid.spacing();
    let c = u[node];
    let mut p = DVector::zeros(n);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let si = grid.stride(i);
        let (up, um) = (u[node + si], u[node - si]);
        p[i] = (up - um) / (2.0 * h[i]);
        a[(i, i)] = (up - 2.0 * c + um) / (h[i] * h[i]);
        for j in 0..i {
            let sj = grid.stride(j);
            let v = (u[node + si + sj] - u[node + si - sj] - u[node - si + sj] + u[node - si - sj]) / (4.0 * h[i] * h[j]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Jet2 { r: c, p, a: SymMat::symmetrize(a) }
}

/// Centered-difference 2-jet at an interior node followed by the riemannian
/// correction `A − Γ_x(p)`. Exact on quadratics in flat charts.
pub fn discrete_jet(u: &GridFunction, grid: &Grid, metric: &MetricChart, node: usize) -> Result<Jet2> {
    check_node(u, grid, node)?;
    let j = coordinate_jet(&u.values, grid, node);
    crate::geometry::riemannian_hessian(metric, &grid.coords(node), &j)
}

fn check_node(u: &GridFunction, grid: &Grid, node: usize) -> Result<()> {
    if !u.matches(grid) {
        return Err(Error::Grid("grid function does not match the lattice".into()));
    }
    if node >= grid.len() || grid.kind(node) != NodeKind::Interior {
        return Err(Error::Grid(format!("node {node} is not interior")));
    }
    Ok(())
}

/// Per-node geometry: base point, Christoffel map and orthonormal frame.
struct NodeGeometry {
    x: Vec<f64>,
    gamma: Option<ChristoffelMap>,
    frame: Option<DMatrix<f64>>,
}

impl NodeGeometry {
    fn new(metric: &MetricChart, grid: &Grid, node: usize) -> Result<Self> {
        let x = grid.coords(node);
        if metric.is_flat() {
            return Ok(NodeGeometry { x, gamma: None, frame: None });
        }
        let gamma = christoffel(metric, &x)?;
        let frame = metric.frame(&x)?;
        Ok(NodeGeometry { x, gamma: Some(gamma), frame: Some(frame) })
    }

    /// `(r, hp, h(A − Γ(p))hᵗ)`.
    fn frame_jet(&self, j: Jet2) -> Jet2 {
        let a = match &self.gamma {
            Some(g) => &j.a - &g.apply(&j.p),
            None => j.a,
        };
        match &self.frame {
            Some(h) => Jet2 { r: j.r, p: h * &j.p, a: a.congruence(h) },
            None => Jet2 { r: j.r, p: j.p, a },
        }
    }
}

fn geometries(metric: &MetricChart, grid: &Grid, nodes: &[usize]) -> Result<Vec<NodeGeometry>> {
    if metric.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: metric.dim(), got: grid.dim() });
    }
    nodes.iter().map(|&k| NodeGeometry::new(metric, grid, k)).collect()
}

/// Framed riemannian jet at an interior node: the jet on which a universal
/// subequation is evaluated.
pub fn framed_discrete_jet(u: &GridFunction, grid: &Grid, metric: &MetricChart, node: usize) -> Result<Jet2> {
    check_node(u, grid, node)?;
    let geo = NodeGeometry::new(metric, grid, node)?;
    Ok(geo.frame_jet(coordinate_jet(&u.values, grid, node)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub node: usize,
    pub coords: Vec<f64>,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicReport {
    pub pass: bool,
    pub min_margin: f64,
    pub witness: Option<Witness>,
}

/// `u` is tested `F`-subharmonic at the jet level: every interior framed
/// discrete jet has margin `≥ −tol`.
pub fn f_subharmonic_test(u: &GridFunction, grid: &Grid, f: &Subequation, metric: &MetricChart, tol: f64) -> Result<SubharmonicReport> {
    subharmonic_on(u, grid, f, metric, tol, |_| true)
}

/// As [`f_subharmonic_test`], restricted to interior nodes selected by `keep`.
pub fn subharmonic_on(
    u: &GridFunction,
    grid: &Grid,
    f: &Subequation,
    metric: &MetricChart,
    tol: f64,
    keep: impl Fn(usize) -> bool + Sync,
) -> Result<SubharmonicReport> {
    if !u.matches(grid) {
        return Err(Error::Grid("grid function does not match the lattice".into()));
    }
    let nodes: Vec<usize> = grid.interior_nodes().filter(|k| keep(*k)).collect();
    let geo = geometries(metric, grid, &nodes)?;
    let mut worst: Option<Witness> = None;
    for (k, g) in nodes.iter().zip(&geo) {
        let m = f.margin(&g.x, &g.frame_jet(coordinate_jet(&u.values, grid, *k)));
        if worst.as_ref().is_none_or(|w| m < w.margin || m.is_nan()) {
            worst = Some(Witness { node: *k, coords: g.x.clone(), margin: m });
        }
    }
    let min_margin = worst.as_ref().map_or(f64::INFINITY, |w| w.margin);
    Ok(SubharmonicReport { pass: min_margin >= -tol, min_margin, witness: worst })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    /// Lexicographic Gauss–Seidel; the reference semantics.
    #[default]
    Sequential,
    /// Jacobi sweeps with nodal updates computed in parallel.
    ParallelJacobi,
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Stop when the largest nodal update is at most this...
    pub tol_iter: f64,
    /// ...and the largest interior `|margin|` is at most this.
    pub tol_residual: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor `ω ∈ (0, 2)`; `1` is plain Gauss–Seidel.
    pub relaxation: f64,
    pub growth: f64,
    pub value_cap: f64,
    pub mode: SweepMode,
    /// Starting values; boundary-data minimum minus one when absent.
    pub initial: Option<GridFunction>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol_iter: 1e-10,
            tol_residual: 1e-8,
            max_sweeps: 100_000,
            relaxation: 1.0,
            growth: 2.0,
            value_cap: 1e8,
            mode: SweepMode::Sequential,
            initial: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub sweeps: usize,
    pub max_update: f64,
    pub max_margin_residual: f64,
    pub witness: Option<Witness>,
    pub wall_time_s: f64,
    pub mode: SweepMode,
    pub verdicts: BTreeMap<String, String>,
}

/// `max |margin|` over interior nodes, with the node attaining it.
pub fn margin_residual(u: &GridFunction, grid: &Grid, f: &Subequation, metric: &MetricChart) -> Result<(f64, Option<Witness>)> {
    let nodes: Vec<usize> = grid.interior_nodes().collect();
    let geo = geometries(metric, grid, &nodes)?;
    Ok(residual_of(&u.values, grid, f, &nodes, &geo))
}

fn residual_of(u: &[f64], grid: &Grid, f: &Subequation, nodes: &[usize], geo: &[NodeGeometry]) -> (f64, Option<Witness>) {
    let mut worst: Option<Witness> = None;
    for (k, g) in nodes.iter().zip(geo) {
        let m = f.margin(&g.x, &g.frame_jet(coordinate_jet(u, grid, *k)));
        if worst.as_ref().is_none_or(|w| m.abs() > w.margin.abs() || m.is_nan()) {
            worst = Some(Witness { node: *k, coords: g.x.clone(), margin: m });
        }
    }
    (worst.as_ref().map_or(0.0, |w| w.margin.abs()), worst)
}

enum NodalFailure {
    Flat,
}

/// Largest `t` with `g(t) ≥ 0` for nonincreasing `g`, starting near `start`.
fn largest_root(g: &dyn Fn(f64) -> f64, start: f64, step0: f64, cfg: &SolveConfig, certify: bool) -> std::result::Result<f64, NodalFailure> {
    let cap = cfg.value_cap;
    if certify && !(g(cap) < 0.0 && g(-cap) > 0.0) {
        return Err(NodalFailure::Flat);
    }
    let g0 = g(start);
    if g0.is_nan() {
        return Err(NodalFailure::Flat);
    }
    let mut step = step0;
    let (mut a, mut fa, mut b, mut fb);
    if g0 >= 0.0 {
        a = start;
        fa = g0;
        loop {
            let t = (a + step).min(cap);
            let ft = g(t);
            if ft < 0.0 {
                b = t;
                fb = ft;
                break;
            }
            if t >= cap || ft.is_nan() {
                return Err(NodalFailure::Flat);
            }
            a = t;
            fa = ft;
            step *= cfg.growth;
        }
    } else {
        b = start;
        fb = g0;
        loop {
            let t = (b - step).max(-cap);
            let ft = g(t);
            if ft >= 0.0 {
                a = t;
                fa = ft;
                break;
            }
            if t <= -cap || ft.is_nan() {
                return Err(NodalFailure::Flat);
            }
            b = t;
            fb = ft;
            step *= cfg.growth;
        }
    }
    // Illinois false position with a bisection every third step; the
    // invariant g(a) ≥ 0 > g(b) keeps `a` on the largest-root side.
    let mut side = 0i8;
    for it in 0..300 {
        let w = b - a;
        if w <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        let mut t = if it % 3 == 2 { a + 0.5 * w } else { (a * fb - b * fa) / (fb - fa) };
        if !(t > a && t < b) {
            t = a + 0.5 * w;
        }
        let ft = g(t);
        if ft >= 0.0 {
            if ft == 0.0 {
                // exact root: stop unless the margin stays flat just above it
                let probe = t + 8.0 * f64::EPSILON * t.abs().max(1.0);
                if probe < b && g(probe) < 0.0 {
                    return Ok(t);
                }
            }
            a = t;
            fa = ft;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = t;
            fb = ft;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    Ok(a)
}

/// Framed jet at a node as an affine function `J₀ + t J_d` of the center value.
struct NodalLine {
    j0: Jet2,
    jd: Jet2,
}

fn nodal_line(u: &[f64], grid: &Grid, node: usize, geo: &NodeGeometry, jd: &Jet2) -> NodalLine {
    let mut j = coordinate_jet(u, grid, node);
    let c = u[node];
    // remove the center contribution: r = c, A_ii has −2c/h_i²
    j.r -= c;
    let h = grid.spacing();
    let mut a = j.a.into_matrix();
    for i in 0..grid.dim() {
        a[(i, i)] += 2.0 * c / (h[i] * h[i]);
    }
    j.a = SymMat::symmetrize(a);
    NodalLine { j0: geo.frame_jet(j), jd: jd.clone() }
}

fn center_direction(grid: &Grid, geo: &NodeGeometry) -> Jet2 {
    let n = grid.dim();
    let h = grid.spacing();
    let d: Vec<f64> = (0..n).map(|i| -2.0 / (h[i] * h[i])).collect();
    let j = Jet2 { r: 1.0, p: DVector::zeros(n), a: SymMat::from_diagonal(&d) };
    // p = 0, so the Christoffel term drops out
    match &geo.frame {
        Some(hm) => Jet2 { r: 1.0, p: DVector::zeros(n), a: j.a.congruence(hm) },
        None => j,
    }
}

fn nodal_update(
    f: &Subequation,
    u: &[f64],
    grid: &Grid,
    node: usize,
    geo: &NodeGeometry,
    jd: &Jet2,
    step0: f64,
    cfg: &SolveConfig,
    certify: bool,
) -> Result<f64> {
    let line = nodal_line(u, grid, node, geo, jd);
    let g = |t: f64| f.margin(&geo.x, &line.j0.axpy(t, &line.jd));
    let start = u[node];
    if cfg!(debug_assertions) {
        let s = step0.max(1e-6 * (1.0 + start.abs()));
        let vals: Vec<f64> = [-8.0, -4.0, -2.0, -1.0, 1.0, 2.0, 4.0, 8.0].iter().map(|k| g(start + k * s)).collect();
        if vals.windows(2).any(|w| w[1] > w[0] + 1e-9 * (1.0 + w[0].abs())) {
            return Err(Error::NonMonotone { node });
        }
    }
    largest_root(&g, start, step0.max(1e-9 * (1.0 + start.abs())), cfg, certify).map_err(|_| Error::FlatUpdate { node })
}

/// Perron-style solve of the Dirichlet problem for `F` with boundary data `φ`.
///
/// Each nodal update freezes the neighbors and moves the center value to the
/// largest `t` with nonnegative margin (bisection/false position on a
/// bracket grown by `cfg.growth`), relaxed by `cfg.relaxation`. Sweeps stop
/// when both the largest update and the largest interior `|margin|` are
/// within tolerance. Boundary nodes keep `φ` exactly.
pub fn perron_solve(f: &Subequation, metric: &MetricChart, grid: &Grid, phi: &GridFunction, cfg: &SolveConfig) -> Result<(GridFunction, SolveReport)> {
    let started = Instant::now();
    if !phi.matches(grid) {
        return Err(Error::Grid("boundary data does not match the lattice".into()));
    }
    if f.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: f.dim() });
    }
    if !(cfg.tol_iter > 0.0 && cfg.tol_residual > 0.0 && cfg.relaxation > 0.0 && cfg.relaxation < 2.0 && cfg.growth > 1.0) {
        return Err(Error::params("solve", "tolerances must be positive, relaxation in (0, 2), growth > 1"));
    }
    let nodes: Vec<usize> = grid.interior_nodes().collect();
    let geo = geometries(metric, grid, &nodes)?;
    let dirs: Vec<Jet2> = geo.iter().map(|g| center_direction(grid, g)).collect();

    let mut u = phi.values.clone();
    match &cfg.initial {
        Some(init) => {
            if !init.matches(grid) {
                return Err(Error::Grid("initial guess does not match the lattice".into()));
            }
            for &k in &nodes {
                u[k] = init.values[k];
            }
        }
        None => {
            let low = grid.boundary_nodes().map(|k| phi.values[k]).fold(f64::INFINITY, f64::min);
            let low = if low.is_finite() { low - 1.0 } else { -1.0 };
            for &k in &nodes {
                u[k] = low;
            }
        }
    }

    let omega = cfg.relaxation;
    let mut last_update = 1.0f64;
    let mut report = SolveReport {
        converged: false,
        sweeps: 0,
        max_update: f64::INFINITY,
        max_margin_residual: f64::INFINITY,
        witness: None,
        wall_time_s: 0.0,
        mode: cfg.mode,
        verdicts: BTreeMap::new(),
    };
    for sweep in 0..cfg.max_sweeps {
        let certify = sweep == 0;
        let mut max_update = 0.0f64;
        match cfg.mode {
            SweepMode::Sequential => {
                for (i, &k) in nodes.iter().enumerate() {
                    let t = nodal_update(f, &u, grid, k, &geo[i], &dirs[i], last_update, cfg, certify)?;
                    let d = omega * (t - u[k]);
                    u[k] += d;
                    max_update = max_update.max(d.abs());
                }
            }
            SweepMode::ParallelJacobi => {
                let roots: Vec<Result<f64>> = nodes
                    .par_iter()
                    .enumerate()
                    .map(|(i, &k)| nodal_update(f, &u, grid, k, &geo[i], &dirs[i], last_update, cfg, certify))
                    .collect();
                for (&k, t) in nodes.iter().zip(roots) {
                    let d = omega * (t? - u[k]);
                    u[k] += d;
                    max_update = max_update.max(d.abs());
                }
            }
        }
        last_update = max_update;
        report.sweeps = sweep + 1;
        report.max_update = max_update;
        if max_update.abs() > cfg.value_cap || u.iter().any(|v| !v.is_finite()) {
            return Err(Error::FlatUpdate { node: nodes.first().copied().unwrap_or(0) });
        }
        if max_update <= cfg.tol_iter || sweep + 1 == cfg.max_sweeps {
            let (res, w) = residual_of(&u, grid, f, &nodes, &geo);
            report.max_margin_residual = res;
            report.witness = w;
            if max_update <= cfg.tol_iter && res <= cfg.tol_residual {
                report.converged = true;
                break;
            }
        }
    }
    report.wall_time_s = started.elapsed().as_secs_f64();
    report.verdicts.insert("converged".into(), if report.converged { "yes" } else { "no" }.into());
    let out = GridFunction::new(grid, u)?;
    if !report.converged {
        return Err(Error::NonConvergence(Box::new((out, report))));
    }
    Ok((out, report))
}

/// Checks `u` against `F̃`: convenience for [`comparison_check`] callers.
pub fn dual_subharmonic_test(v: &GridFunction, grid: &Grid, f: &Subequation, metric: &MetricChart, tol: f64) -> Result<SubharmonicReport> {
    f_subharmonic_test(v, grid, &dual(f), metric, tol)
}
