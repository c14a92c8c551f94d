//! Zero maximum principle, comparison, and the theorem-on-sums probe.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{f_subharmonic_test, Grid, GridFunction, NodeKind, SubharmonicReport};
use crate::error::{Error, Result};
use crate::geometry::MetricChart;
use crate::subeq::{dual, Subequation};

const ZMP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ZmpVerdict {
    Pass,
    Violation,
    /// `w` is positive somewhere on the boundary, so nothing is claimed.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZmpReport {
    pub verdict: ZmpVerdict,
    pub boundary_max: f64,
    pub interior_max: f64,
    /// `max(interior_max, 0)` on a violation, `0` otherwise.
    pub magnitude: f64,
    pub witness: Option<usize>,
}

/// If `max_{∂K} w ≤ 0`, reports `max_K w`; a violation when it exceeds `1e−9`.
pub fn zmp_check(w: &GridFunction, kinds: &[NodeKind]) -> Result<ZmpReport> {
    if kinds.len() != w.len() {
        return Err(Error::Grid("mask does not match the grid function".into()));
    }
    let mut bmax = f64::NEG_INFINITY;
    let mut imax = f64::NEG_INFINITY;
    let mut witness = None;
    for (k, (v, kind)) in w.values.iter().zip(kinds).enumerate() {
        match kind {
            NodeKind::Boundary => bmax = bmax.max(*v),
            NodeKind::Interior => {
                if *v > imax {
                    imax = *v;
                    witness = Some(k);
                }
            }
            NodeKind::Exterior => {}
        }
    }
    let kmax = imax.max(bmax);
    let (verdict, magnitude) = if bmax > ZMP_TOL {
        (ZmpVerdict::NotApplicable, 0.0)
    } else if kmax > ZMP_TOL {
        (ZmpVerdict::Violation, kmax)
    } else {
        (ZmpVerdict::Pass, 0.0)
    };
    Ok(ZmpReport { verdict, boundary_max: bmax, interior_max: imax, magnitude, witness })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub u_subharmonic: SubharmonicReport,
    pub v_dual_subharmonic: SubharmonicReport,
    pub zmp: ZmpReport,
}

impl ComparisonReport {
    /// Both functions pass their tests and the sum still violates the ZMP.
    pub fn comparison_fails(&self) -> bool {
        self.u_subharmonic.pass && self.v_dual_subharmonic.pass && self.zmp.verdict == ZmpVerdict::Violation
    }
}

/// `u ∈ F(K)`, `v ∈ F̃(K)` at the jet level, then the ZMP for `u + v`.
pub fn comparison_check(
    u: &GridFunction,
    v: &GridFunction,
    f: &Subequation,
    metric: &MetricChart,
    grid: &Grid,
    tol: f64,
) -> Result<ComparisonReport> {
    let us = f_subharmonic_test(u, grid, f, metric, tol)?;
    let vs = f_subharmonic_test(v, grid, &dual(f), metric, tol)?;
    let sum = u.zip_with(v, |a, b| a + b)?;
    Ok(ComparisonReport { u_subharmonic: us, v_dual_subharmonic: vs, zmp: zmp_check(&sum, grid.kinds())? })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumsRecord {
    pub eps: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub m_eps: f64,
    /// `(x_ε − y_ε)/ε`.
    pub p_eps: Vec<f64>,
    /// `|x_ε − y_ε|²/ε`.
    pub penalty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumsReport {
    pub applicable: bool,
    /// `max_K (u + v)`.
    pub m0: f64,
    pub records: Vec<SumsRecord>,
    /// `M_ε` nonincreasing as `ε` decreases along the ladder.
    pub monotone: bool,
    /// Final penalty at most `max(first penalty, Σh²/ε_last)`.
    pub penalty_trend: bool,
}

pub const MAX_PAIRS: u64 = 100_000_000;

/// Exhaustive maximization of `u(x) + v(y) − |x − y|²/(2ε)` over node pairs
/// of `K` (interior and boundary nodes of `grid`), for each `ε` in `eps`
/// (sorted decreasing before use).
pub fn sums_probe(u: &GridFunction, v: &GridFunction, grid: &Grid, eps: &[f64]) -> Result<SumsReport> {
    if !u.matches(grid) || !v.matches(grid) {
        return Err(Error::Grid("grid functions do not match the lattice".into()));
    }
    let k: Vec<usize> = (0..grid.len()).filter(|i| grid.kind(*i) != NodeKind::Exterior).collect();
    let pairs = (k.len() as u64) * (k.len() as u64);
    if pairs > MAX_PAIRS {
        return Err(Error::TooManyPairs(pairs));
    }
    let m0 = k.iter().map(|&i| u.values[i] + v.values[i]).fold(f64::NEG_INFINITY, f64::max);
    let mut ladder: Vec<f64> = eps.to_vec();
    ladder.sort_by(|a, b| b.total_cmp(a));
    if !(m0 > ZMP_TOL) {
        return Ok(SumsReport { applicable: false, m0, records: vec![], monotone: true, penalty_trend: true });
    }
    let coords: Vec<Vec<f64>> = k.iter().map(|&i| grid.coords(i)).collect();
    let mut records = Vec::with_capacity(ladder.len());
    for &e in &ladder {
        let (val, xi, yi) = (0..k.len())
            .into_par_iter()
            .map(|a| {
                let ua = u.values[k[a]];
                let mut best = (f64::NEG_INFINITY, a, a);
                for b in 0..k.len() {
                    let d2: f64 = coords[a].iter().zip(&coords[b]).map(|(p, q)| (p - q) * (p - q)).sum();
                    let val = ua + v.values[k[b]] - d2 / (2.0 * e);
                    if val > best.0 {
                        best = (val, a, b);
                    }
                }
                best
            })
            .reduce(|| (f64::NEG_INFINITY, 0, 0), |p, q| if q.0 > p.0 || (q.0 == p.0 && (q.1, q.2) < (p.1, p.2)) { q } else { p });
        let (x, y) = (coords[xi].clone(), coords[yi].clone());
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let d2: f64 = d.iter().map(|t| t * t).sum();
        records.push(SumsRecord { eps: e, p_eps: d.iter().map(|t| t / e).collect(), penalty: d2 / e, m_eps: val, x, y });
    }
    let monotone = records.windows(2).all(|w| w[1].m_eps <= w[0].m_eps + 1e-12);
    let h2: f64 = grid.spacing().iter().map(|h| h * h).sum();
    let penalty_trend = match (records.first(), records.last()) {
        (Some(a), Some(b)) => b.penalty <= a.penalty.max(h2 / b.eps) + 1e-12,
        _ => true,
    };
    Ok(SumsReport { applicable: true, m0, records, monotone, penalty_trend })
}
