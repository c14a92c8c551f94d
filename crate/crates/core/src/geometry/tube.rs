//! Closed-form fields on tube coordinates around a great circle in `S³`
//! and on the product `S³ × S³`.
//!
//! `s3_tube` coordinates are `(δ, θ, φ)` with `δ` the distance to the core
//! circle; `s3xs3_tube` coordinates are `(δ₁, θ₁, φ₁, δ₂, θ₂, φ₂)`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;

use super::{DomainSpec, TUBE_BAND};
use crate::error::{Error, Result};
use crate::jet::{Jet2, SymMat};

fn check_band(x: &[f64], axes: &[usize]) -> Result<()> {
    for &k in axes {
        let d = x[k];
        if !(TUBE_BAND - 1e-12..=FRAC_PI_2 - TUBE_BAND + 1e-12).contains(&d) {
            return Err(Error::OutsideChart(format!("tube coordinate {d} outside [{TUBE_BAND}, pi/2 - {TUBE_BAND}]")));
        }
    }
    Ok(())
}

/// Coordinate jet of `s · ½ δ²` where `δ = x[axis]`.
pub fn half_delta_sq_jet(n: usize, axis: usize, s: f64, x: &[f64]) -> Jet2 {
    let d = x[axis];
    let mut p = DVector::zeros(n);
    p[axis] = s * d;
    let mut a = SymMat::zeros(n).into_matrix();
    a[(axis, axis)] = s;
    Jet2 { r: 0.5 * s * d * d, p, a: SymMat::symmetrize(a) }
}

/// Framed riemannian hessian eigenvalues of `½δ²` on `s3_tube` at `δ = s`:
/// `(1, s cot s, −s tan s)`.
pub fn half_delta_sq_hessian_eigenvalues(s: f64) -> [f64; 3] {
    [1.0, s / s.tan(), -s * s.tan()]
}

/// The torus `T_s = {δ = s}` bounding the tube of radius `s` about the core circle.
pub fn torus_domain(s: f64) -> DomainSpec {
    DomainSpec::from_fn(&format!("tube(s={s})"), move |x| x[0] - s).with_jet(move |x| {
        let mut p = DVector::zeros(3);
        p[0] = 1.0;
        Jet2 { r: x[0] - s, p, a: SymMat::zeros(3) }
    })
}

/// `u₁ = −½δ₁²`, `u₂ = −½δ₂²`, `ρ = ½δ₁² + ½δ₂²` on `s3xs3_tube`, with
/// `Ω_c = {ρ < c}`.
#[derive(Clone, Copy, Debug)]
pub struct TubePairFields {
    pub c: f64,
}

impl TubePairFields {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c < std::f64::consts::PI.powi(2) / 8.0) {
            return Err(Error::params("tube pair", format!("need 0 < c < pi^2/8, got {c}")));
        }
        Ok(TubePairFields { c })
    }

    pub fn delta(&self, x: &[f64], k: usize) -> Result<f64> {
        check_band(x, &[3 * k])?;
        Ok(x[3 * k])
    }

    pub fn u1(&self, x: &[f64]) -> f64 {
        -0.5 * x[0] * x[0]
    }

    pub fn u2(&self, x: &[f64]) -> f64 {
        -0.5 * x[3] * x[3]
    }

    pub fn rho(&self, x: &[f64]) -> f64 {
        0.5 * (x[0] * x[0] + x[3] * x[3])
    }

    pub fn u1_jet(&self, x: &[f64]) -> Result<Jet2> {
        check_band(x, &[0, 3])?;
        Ok(half_delta_sq_jet(6, 0, -1.0, x))
    }

    pub fn u2_jet(&self, x: &[f64]) -> Result<Jet2> {
        check_band(x, &[0, 3])?;
        Ok(half_delta_sq_jet(6, 3, -1.0, x))
    }

    pub fn rho_jet(&self, x: &[f64]) -> Result<Jet2> {
        check_band(x, &[0, 3])?;
        Ok(&half_delta_sq_jet(6, 0, 1.0, x) + &half_delta_sq_jet(6, 3, 1.0, x))
    }

    /// `Ω_c = {ρ − c < 0}`.
    pub fn domain(&self) -> DomainSpec {
        let c = self.c;
        DomainSpec::from_fn(&format!("tube_pair(c={c})"), move |x| 0.5 * (x[0] * x[0] + x[3] * x[3]) - c).with_jet(move |x| {
            let j = &half_delta_sq_jet(6, 0, 1.0, x) + &half_delta_sq_jet(6, 3, 1.0, x);
            j.with_r(j.r - c)
        })
    }
}
