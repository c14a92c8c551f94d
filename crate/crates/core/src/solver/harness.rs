//! Closed-form counterexample harnesses.
//!
//! * The tube pair on `S³ × S³`: `u₁ = −½δ₁²` and `v = u₂ + c` with
//!   `u₂ = −½δ₂²` are subharmonic for `λ₃ ≥ 0` and its dual `λ₄ ≥ 0`
//!   respectively, agree on `∂Ω_c` after the shift `v ↦ −v`, yet
//!   `u₁ + v = c − ρ` has interior maximum `c`.
//! * The root-gradient operator `λ₁(A − ½|p|^{1/2}(I + P_p)) ≥ 0` on a ball,
//!   with two distinct harmonics `0` and `−V`, `V = (R³ − |x|³)/12`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sums_probe, zmp_check, Grid, GridFunction, NodeKind, SumsReport, ZmpReport};
use crate::error::{Error, Result};
use crate::geometry::tube::TubePairFields;
use crate::geometry::{builtin_metric, framed_jet, TUBE_BAND};
use crate::jet::random;
use crate::jet::{Jet2, SymMat};
use crate::subeq::catalog::pq;

/// Coordinate jet of `V(x) = (R³ − |x|³)/12`.
pub fn cubic_profile_jet(big_r: f64, x: &[f64]) -> Jet2 {
    let n = x.len();
    let xv = DVector::from_column_slice(x);
    let r = xv.norm();
    let value = (big_r.powi(3) - r.powi(3)) / 12.0;
    if r == 0.0 {
        return Jet2 { r: value, p: DVector::zeros(n), a: SymMat::zeros(n) };
    }
    let p = &xv * (-0.25 * r);
    let a = (&SymMat::identity(n).scale(r) + &SymMat::outer(&xv).scale(1.0 / r)).scale(-0.25);
    Jet2 { r: value, p, a }
}

#[derive(Clone, Debug)]
pub struct TubeHarnessOptions {
    /// Spacing of the `δ` axes of the search grid.
    pub h: f64,
    /// Nodes per angle axis of the search grid.
    pub angle_nodes: usize,
    pub samples: usize,
    pub zero_band: f64,
    pub seed: u64,
    /// Coarse grid for the sums probe: `δ` nodes and angle nodes per axis.
    pub sums_delta_nodes: usize,
    pub sums_angle_nodes: usize,
    pub sums_eps: Vec<f64>,
}

impl Default for TubeHarnessOptions {
    fn default() -> Self {
        TubeHarnessOptions {
            h: 2e-2,
            angle_nodes: 3,
            samples: 100,
            zero_band: 1e-6,
            seed: 0,
            sums_delta_nodes: 12,
            sums_angle_nodes: 2,
            sums_eps: vec![1.0, 0.1, 0.01, 0.001],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubeHarnessReport {
    pub c: f64,
    pub samples: usize,
    /// Samples whose framed `Hess u₁` has two negative, three zero and one
    /// positive eigenvalue.
    pub signature_matches: usize,
    pub signature_counts: Vec<[usize; 3]>,
    /// `max |λ₄|` of the framed hessians of `u₁` and `−u₂ − c`.
    pub lambda4_residual_u1: f64,
    pub lambda4_residual_pair: f64,
    /// Smallest `λ₃(Hess u₁)` and `λ₄(Hess(u₂ + c))` over the samples.
    pub min_margin_u: f64,
    pub min_margin_v_dual: f64,
    pub zmp: ZmpReport,
    pub grid_nodes: usize,
    /// `max |u₁ + u₂ + c|` on sampled points of `∂Ω_c`.
    pub boundary_gap: f64,
    /// `u₁ − (−u₂ − c)` at the grid node nearest the core.
    pub interior_gap: f64,
    pub sums: Option<SumsReport>,
}

fn band_nodes(h_target: f64, delta_max: f64) -> (usize, f64) {
    let span = delta_max - TUBE_BAND;
    let nodes = (span / h_target).round() as usize + 1;
    (nodes.max(3), span / (nodes.max(3) - 1) as f64)
}

/// Lattice on `s3xs3_tube` with interior `ρ < c` and boundary the non-interior
/// nodes with an interior axis neighbor. Band-edge nodes may be interior: the
/// band edge is a coordinate artifact, not part of `∂Ω_c`.
fn tube_grid(c: f64, delta_nodes: usize, h_delta: f64, angle_nodes: usize) -> Result<Grid> {
    let ha = 2.0 * PI / (angle_nodes.max(2) - 1) as f64;
    let dims = [delta_nodes, angle_nodes, angle_nodes, delta_nodes, angle_nodes, angle_nodes];
    let lo = [TUBE_BAND, 0.0, 0.0, TUBE_BAND, 0.0, 0.0];
    let h = [h_delta, ha, ha, h_delta, ha, ha];
    let total: usize = dims.iter().product();
    let rho_of = |node: usize| {
        let per = dims[1] * dims[2];
        let i1 = node / (per * dims[3] * per);
        let i2 = (node / per) % dims[3];
        let (d1, d2) = (TUBE_BAND + i1 as f64 * h_delta, TUBE_BAND + i2 as f64 * h_delta);
        0.5 * (d1 * d1 + d2 * d2)
    };
    let mut kinds: Vec<NodeKind> = (0..total).map(|k| if rho_of(k) < c { NodeKind::Interior } else { NodeKind::Exterior }).collect();
    let tmp = Grid::with_mask(&lo, &h, &dims, kinds.clone())?;
    for node in 0..total {
        if kinds[node] != NodeKind::Exterior {
            continue;
        }
        let mi = tmp.multi_index(node);
        let touches = (0..6).any(|ax| {
            [-1i64, 1].iter().any(|o| {
                let v = mi[ax] as i64 + o;
                v >= 0 && v < dims[ax] as i64 && tmp.kind((node as i64 + o * tmp.stride(ax) as i64) as usize) == NodeKind::Interior
            })
        });
        if touches {
            kinds[node] = NodeKind::Boundary;
        }
    }
    Grid::with_mask(&lo, &h, &dims, kinds)
}

fn sample_point(c: f64, rng: &mut random::Rng64) -> [f64; 6] {
    loop {
        let d1 = rng.random_range(TUBE_BAND..FRAC_PI_2 - TUBE_BAND);
        let d2 = rng.random_range(TUBE_BAND..FRAC_PI_2 - TUBE_BAND);
        if 0.5 * (d1 * d1 + d2 * d2) < c {
            let mut a = || rng.random_range(0.0..2.0 * PI);
            return [d1, a(), a(), d2, a(), a()];
        }
    }
}

/// Runs the tube-pair counterexample for `0 < c < π²/8`.
pub fn tube_counterexample_harness(c: f64, opts: &TubeHarnessOptions) -> Result<TubeHarnessReport> {
    let fields = TubePairFields::new(c)?;
    let metric = builtin_metric("s3xs3_tube")?;
    let f = pq(6, 3)?;
    let fd = crate::subeq::dual(&f);
    let delta_max = ((2.0 * c).sqrt() + 2.0 * opts.h).min(FRAC_PI_2 - TUBE_BAND);
    if opts.h <= 0.0 || (delta_max - TUBE_BAND) / opts.h < 4.0 {
        return Err(Error::Grid(format!("resolution h = {} too coarse for the band geometry", opts.h)));
    }
    let mut rng = random::rng(opts.seed);

    let mut counts = Vec::with_capacity(opts.samples);
    let (mut l4u, mut l4v, mut mu, mut mv) = (0.0f64, 0.0f64, f64::INFINITY, f64::INFINITY);
    for _ in 0..opts.samples {
        let x = sample_point(c, &mut rng);
        let ju = framed_jet(&metric, &x, &fields.u1_jet(&x)?)?;
        let ev = ju.a.eigenvalues().0;
        let neg = ev.iter().filter(|l| **l < -opts.zero_band).count();
        let zero = ev.iter().filter(|l| l.abs() <= opts.zero_band).count();
        counts.push([neg, zero, ev.len() - neg - zero]);
        l4u = l4u.max(ev[3].abs());
        mu = mu.min(f.margin(&x, &ju));
        // −u₂ − c and u₂ + c share the hessian up to sign
        let jv = framed_jet(&metric, &x, &fields.u2_jet(&x)?)?;
        l4v = l4v.max((-&jv.a).eigenvalues().0[3].abs());
        mv = mv.min(fd.margin(&x, &jv));
    }
    let matches = counts.iter().filter(|c| **c == [2, 3, 1]).count();

    let (dn, hd) = band_nodes(opts.h, delta_max);
    let grid = tube_grid(c, dn, hd, opts.angle_nodes)?;
    let w = GridFunction::from_fn(&grid, |x| fields.u1(x) + fields.u2(x) + c);
    let zmp = zmp_check(&w, grid.kinds())?;
    let core = [TUBE_BAND, 0.0, 0.0, TUBE_BAND, 0.0, 0.0];
    let interior_gap = fields.u1(&core) + fields.u2(&core) + c;

    let mut boundary_gap = 0.0f64;
    let s = (2.0 * c).sqrt();
    let a_lo = (TUBE_BAND / s).min(1.0).asin();
    let a_hi = FRAC_PI_2 - a_lo;
    for _ in 0..opts.samples {
        let al = rng.random_range(a_lo..=a_hi);
        let mut x = sample_point(c, &mut rng);
        x[0] = s * al.cos();
        x[3] = s * al.sin();
        boundary_gap = boundary_gap.max((fields.u1(&x) + fields.u2(&x) + c).abs());
    }

    let sums = if opts.sums_delta_nodes >= 3 {
        let (_, hs) = band_nodes((delta_max - TUBE_BAND) / (opts.sums_delta_nodes - 1) as f64, delta_max);
        let g = tube_grid(c, opts.sums_delta_nodes, hs, opts.sums_angle_nodes)?;
        let u = GridFunction::from_fn(&g, |x| fields.u1(x));
        let v = GridFunction::from_fn(&g, |x| fields.u2(x) + c);
        Some(sums_probe(&u, &v, &g, &opts.sums_eps)?)
    } else {
        None
    };

    Ok(TubeHarnessReport {
        c,
        samples: opts.samples,
        signature_matches: matches,
        signature_counts: counts,
        lambda4_residual_u1: l4u,
        lambda4_residual_pair: l4v,
        min_margin_u: mu,
        min_margin_v_dual: mv,
        zmp,
        grid_nodes: grid.len(),
        boundary_gap,
        interior_gap,
        sums,
    })
}
