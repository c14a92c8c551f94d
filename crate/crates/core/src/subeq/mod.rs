//! Subequations as margin functions on the 2-jet fiber.
//!
//! A [`Subequation`] stores a margin `m(x, J)` with `F_x = {m ≥ 0}` and
//! `Int F_x = {m > 0}` (on the generic stratum), together with a hand-derived
//! margin for the Dirichlet dual `F̃ = ∼(−Int F)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{Jet2, SymMat};

pub mod catalog;
pub mod planes;
mod probe;

pub use catalog::{catalog_construct, catalog_entries, EntryParams};
pub use probe::{
    asymptotic_interior_contains, asymptotic_interior_with_radius, c_strict_contains, eigen_boundary_graph, monotonicity_check,
    t_condition_probe, AsymptoticOptions, AsymptoticVerdict, MonotoneSet, MonotonicityReport, StrictVerdict,
};

/// `m(x, J)`.
pub type MarginFn = Arc<dyn Fn(&[f64], &Jet2) -> f64 + Send + Sync>;
/// A jet-valued function of the base point.
pub type JetField = Arc<dyn Fn(&[f64]) -> Jet2 + Send + Sync>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// Margin does not depend on `r`.
    pub reduced: bool,
    /// Margin depends on `A` only.
    pub pure_second_order: bool,
    /// `m(x, tJ)` has the sign of `m(x, J)` for `t > 0`.
    pub cone: bool,
    /// Margin does not depend on `x`.
    pub constant_coefficient: bool,
    /// Pure second order and a symmetric function of the eigenvalues of `A`.
    pub eigen_symmetric: bool,
    /// Margin comes from a numerical minimization and is an upper bound.
    pub approximate: bool,
}

impl Flags {
    pub const EIGEN_CONE: Flags = Flags {
        reduced: true,
        pure_second_order: true,
        cone: true,
        constant_coefficient: true,
        eigen_symmetric: true,
        approximate: false,
    };
    pub const NONE: Flags = Flags {
        reduced: false,
        pure_second_order: false,
        cone: false,
        constant_coefficient: false,
        eigen_symmetric: false,
        approximate: false,
    };

    fn and(self, o: Flags) -> Flags {
        Flags {
            reduced: self.reduced && o.reduced,
            pure_second_order: self.pure_second_order && o.pure_second_order,
            cone: self.cone && o.cone,
            constant_coefficient: self.constant_coefficient && o.constant_coefficient,
            eigen_symmetric: self.eigen_symmetric && o.eigen_symmetric,
            approximate: self.approximate || o.approximate,
        }
    }
}

#[derive(Clone)]
pub struct Subequation {
    name: String,
    dual_name: String,
    dim: usize,
    margin: MarginFn,
    dual_margin: MarginFn,
    pub flags: Flags,
    lipschitz: Option<f64>,
    dual_lipschitz: Option<f64>,
    invariance: String,
}

impl fmt::Debug for Subequation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subequation")
            .field("name", &self.name)
            .field("dual_name", &self.dual_name)
            .field("dim", &self.dim)
            .field("flags", &self.flags)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl Subequation {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        margin: impl Fn(&[f64], &Jet2) -> f64 + Send + Sync + 'static,
        dual_margin: impl Fn(&[f64], &Jet2) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let name = name.into();
        Subequation {
            dual_name: format!("dual({name})"),
            name,
            dim,
            margin: Arc::new(margin),
            dual_margin: Arc::new(dual_margin),
            flags: Flags::NONE,
            lipschitz: None,
            dual_lipschitz: None,
            invariance: String::new(),
        }
    }

    pub fn with_flags(mut self, flags: Flags) -> Self {
        self.flags = flags;
        self
    }

    /// Same bound for the margin and its dual.
    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self.dual_lipschitz = Some(l);
        self
    }

    pub fn with_dual_name(mut self, name: impl Into<String>) -> Self {
        self.dual_name = name.into();
        self
    }

    pub fn with_invariance(mut self, note: impl Into<String>) -> Self {
        self.invariance = note.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dual_name(&self) -> &str {
        &self.dual_name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn invariance(&self) -> &str {
        &self.invariance
    }

    #[inline]
    pub fn margin(&self, x: &[f64], j: &Jet2) -> f64 {
        (self.margin)(x, j)
    }

    #[inline]
    pub fn dual_margin(&self, x: &[f64], j: &Jet2) -> f64 {
        (self.dual_margin)(x, j)
    }

    /// Generic negation rule `−m(x, −J)`; agrees with the hand dual off
    /// degenerate strata.
    pub fn negation_margin(&self, x: &[f64], j: &Jet2) -> f64 {
        -(self.margin)(x, &-j)
    }

    pub fn margin_fn(&self) -> MarginFn {
        self.margin.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

/// Classifies `J` by the sign of the margin with a band of width `tol`.
pub fn contains(f: &Subequation, x: &[f64], j: &Jet2, tol: f64) -> Membership {
    let m = f.margin(x, j);
    if m > tol {
        Membership::Inside
    } else if m < -tol {
        Membership::Outside
    } else {
        Membership::Boundary
    }
}

/// The Dirichlet dual: swaps the margin with the hand dual margin, so the
/// double dual is the original entry.
pub fn dual(f: &Subequation) -> Subequation {
    Subequation {
        name: f.dual_name.clone(),
        dual_name: f.name.clone(),
        dim: f.dim,
        margin: f.dual_margin.clone(),
        dual_margin: f.margin.clone(),
        flags: f.flags,
        lipschitz: f.dual_lipschitz,
        dual_lipschitz: f.lipschitz,
        invariance: f.invariance.clone(),
    }
}

/// `F₁ ∩ F₂` with margin `min(m₁, m₂)` and dual margin `max(m̃₁, m̃₂)`.
pub fn intersection(f1: &Subequation, f2: &Subequation) -> Result<Subequation> {
    if f1.dim != f2.dim {
        return Err(Error::DimensionMismatch { expected: f1.dim, got: f2.dim });
    }
    let (m1, m2) = (f1.margin.clone(), f2.margin.clone());
    let (d1, d2) = (f1.dual_margin.clone(), f2.dual_margin.clone());
    // min of an L₁- and an L₂-Lipschitz function is max(L₁, L₂)-Lipschitz
    let lip = |a: Option<f64>, b: Option<f64>| Some(a?.max(b?));
    Ok(Subequation {
        name: format!("intersection({},{})", f1.name, f2.name),
        dual_name: format!("union({},{})", f1.dual_name, f2.dual_name),
        dim: f1.dim,
        margin: Arc::new(move |x, j| m1(x, j).min(m2(x, j))),
        dual_margin: Arc::new(move |x, j| d1(x, j).max(d2(x, j))),
        flags: f1.flags.and(f2.flags),
        lipschitz: lip(f1.lipschitz, f2.lipschitz),
        dual_lipschitz: lip(f1.dual_lipschitz, f2.dual_lipschitz),
        invariance: String::new(),
    })
}

/// `F + J₀`: `margin′(x, J) = m(x, J − J₀(x))`, dual `m̃(x, J + J₀(x))`.
pub fn translate(f: &Subequation, j0: JetField) -> Subequation {
    let (m, d) = (f.margin.clone(), f.dual_margin.clone());
    let (ja, jb) = (j0.clone(), j0);
    Subequation {
        name: format!("translate({})", f.name),
        dual_name: format!("translate({})", f.dual_name),
        dim: f.dim,
        margin: Arc::new(move |x, j| m(x, &(j - &ja(x)))),
        dual_margin: Arc::new(move |x, j| d(x, &(j + &jb(x)))),
        flags: Flags { reduced: f.flags.reduced, approximate: f.flags.approximate, ..Flags::NONE },
        lipschitz: f.lipschitz,
        dual_lipschitz: f.dual_lipschitz,
        invariance: String::new(),
    }
}

/// Translation by a constant jet.
pub fn translate_const(f: &Subequation, j0: Jet2) -> Subequation {
    let zero = j0.norm() == 0.0;
    let pure = j0.r == 0.0 && j0.p.iter().all(|v| *v == 0.0);
    let mut out = translate(f, Arc::new(move |_| j0.clone()));
    out.flags = Flags {
        cone: f.flags.cone && zero,
        pure_second_order: f.flags.pure_second_order && pure,
        constant_coefficient: f.flags.constant_coefficient,
        eigen_symmetric: f.flags.eigen_symmetric && zero,
        ..out.flags
    };
    out
}

type MatField = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
type LinearPart = Arc<dyn Fn(&[f64], &DVector<f64>) -> SymMat + Send + Sync>;

/// `Φ_x(r, p, A) = (r, g p, h A hᵗ + L(p)) + J₀(x)`.
#[derive(Clone)]
pub struct AffineJetMap {
    n: usize,
    g: MatField,
    h: MatField,
    l: LinearPart,
    j0: JetField,
    offset_free: bool,
}

impl AffineJetMap {
    pub fn identity(n: usize) -> Self {
        let id: MatField = Arc::new(move |_| DMatrix::identity(n, n));
        AffineJetMap {
            n,
            g: id.clone(),
            h: id,
            l: Arc::new(move |_, _| SymMat::zeros(n)),
            j0: Arc::new(move |_| Jet2::zero(n)),
            offset_free: true,
        }
    }

    /// Constant coefficients; `l[k]` is the matrix multiplying `p_k` (empty for `L = 0`).
    pub fn constant(g: DMatrix<f64>, h: DMatrix<f64>, l: Vec<SymMat>, j0: Jet2) -> Result<Self> {
        let n = g.nrows();
        for (m, what) in [(&g, "g"), (&h, "h")] {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
            }
            if m.clone().lu().determinant().abs() < 1e-14 {
                return Err(Error::Singular(if what == "g" { "affine map g" } else { "affine map h" }));
            }
        }
        if !(l.is_empty() || l.len() == n) || j0.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: j0.dim() });
        }
        let offset_free = j0.norm() == 0.0;
        Ok(AffineJetMap {
            n,
            g: Arc::new(move |_| g.clone()),
            h: Arc::new(move |_| h.clone()),
            l: Arc::new(move |_, p| {
                let mut acc = SymMat::zeros(n);
                for (k, lk) in l.iter().enumerate() {
                    acc = &acc + &lk.scale(p[k]);
                }
                acc
            }),
            j0: Arc::new(move |_| j0.clone()),
            offset_free,
        })
    }

    /// Fully `x`-dependent map; invertibility is checked on use.
    pub fn from_fns(
        n: usize,
        g: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        h: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        l: impl Fn(&[f64], &DVector<f64>) -> SymMat + Send + Sync + 'static,
        j0: impl Fn(&[f64]) -> Jet2 + Send + Sync + 'static,
    ) -> Self {
        AffineJetMap { n, g: Arc::new(g), h: Arc::new(h), l: Arc::new(l), j0: Arc::new(j0), offset_free: false }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn apply_linear(&self, x: &[f64], j: &Jet2) -> Jet2 {
        let a = &j.a.congruence(&(self.h)(x)) + &(self.l)(x, &j.p);
        Jet2 { r: j.r, p: (self.g)(x) * &j.p, a }
    }

    pub fn apply(&self, x: &[f64], j: &Jet2) -> Jet2 {
        &self.apply_linear(x, j) + &(self.j0)(x)
    }

    pub fn offset(&self, x: &[f64]) -> Jet2 {
        (self.j0)(x)
    }

    pub fn inverse_apply(&self, x: &[f64], j: &Jet2) -> Result<Jet2> {
        let lin = j - &(self.j0)(x);
        let gi = (self.g)(x).try_inverse().ok_or(Error::Singular("affine map g"))?;
        let hi = (self.h)(x).try_inverse().ok_or(Error::Singular("affine map h"))?;
        let p = gi * &lin.p;
        let a = (&lin.a - &(self.l)(x, &p)).congruence(&hi);
        Ok(Jet2 { r: lin.r, p, a })
    }
}

/// `margin′(x, J) = m(x, Φ_x(J))`; the dual margin is `m̃(x, Φ_lin(J) − J₀(x))`.
pub fn affine_transform(f: &Subequation, phi: &AffineJetMap) -> Result<Subequation> {
    if phi.n != f.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, got: phi.n });
    }
    let (m, d) = (f.margin.clone(), f.dual_margin.clone());
    let (pa, pb) = (phi.clone(), phi.clone());
    Ok(Subequation {
        name: format!("affine({})", f.name),
        dual_name: format!("affine({})", f.dual_name),
        dim: f.dim,
        margin: Arc::new(move |x, j| m(x, &pa.apply(x, j))),
        dual_margin: Arc::new(move |x, j| d(x, &(&pb.apply_linear(x, j) - &pb.offset(x)))),
        flags: Flags {
            reduced: f.flags.reduced,
            cone: f.flags.cone && phi.offset_free,
            approximate: f.flags.approximate,
            ..Flags::NONE
        },
        lipschitz: None,
        dual_lipschitz: None,
        invariance: String::new(),
    })
}
