//! Named catalog of subequations, addressable by `name:key=value,…` strings.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use super::planes;
use super::{Flags, Subequation};
use crate::error::{Error, Result};
use crate::jet::{
    binomial, garding_roots_unchecked, hermitian_part_complex, hermitian_part_quaternionic, ordered_eigenvalues,
    ComplexStructure, Jet2, QuaternionicStructure, SymMat, MAX_DIM,
};

/// A parsed `name(:key=value(,key=value)*)?` string. Display gives the
/// canonical form with keys sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryParams {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Numeric values print in shortest round-trip form; `-0` prints as `0`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

impl EntryParams {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |why: &str| Error::params(text, why.to_string());
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (text, None),
        };
        if !valid_ident(name) {
            return Err(bad("entry name must be [A-Za-z0-9_]+"));
        }
        let mut params = BTreeMap::new();
        if let Some(rest) = rest {
            for kv in rest.split(',') {
                let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
                if !valid_ident(k) || v.is_empty() || v.contains('=') {
                    return Err(bad("malformed key=value pair"));
                }
                let v = match v.parse::<f64>() {
                    Ok(x) if x.is_finite() && v != "-" && v != "+" => fmt_num(x),
                    _ => v.to_string(),
                };
                if params.insert(k.to_string(), v).is_some() {
                    return Err(bad("duplicate key"));
                }
            }
        }
        Ok(EntryParams { name: name.to_string(), params })
    }

    pub fn new(name: &str, params: &[(&str, String)]) -> Self {
        EntryParams {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    fn take_num(&mut self, key: &str) -> Result<Option<f64>> {
        match self.params.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::params(&self.name, format!("`{key}` must be a number, got `{v}`"))),
        }
    }

    fn take_int(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take_num(key)? {
            None => Ok(None),
            Some(v) if v >= 0.0 && v.fract() == 0.0 => Ok(Some(v as usize)),
            Some(v) => Err(Error::params(&self.name, format!("`{key}` must be a nonnegative integer, got {v}"))),
        }
    }

    fn need_int(&mut self, key: &str) -> Result<usize> {
        self.take_int(key)?.ok_or_else(|| Error::params(&self.name, format!("missing `{key}`")))
    }

    fn need_num(&mut self, key: &str) -> Result<f64> {
        self.take_num(key)?.ok_or_else(|| Error::params(&self.name, format!("missing `{key}`")))
    }

    fn take_str(&mut self, key: &str) -> Option<String> {
        self.params.remove(key)
    }

    fn finish(&self) -> Result<()> {
        match self.params.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::params(&self.name, format!("unknown key `{k}`"))),
        }
    }
}

impl fmt::Display for EntryParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

fn entry_name(name: &str, params: &[(&str, String)]) -> String {
    EntryParams::new(name, params).to_string()
}

fn check_n(entry: &str, n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::params(entry, format!("dimension {n} outside 1..={MAX_DIM}")))
    }
}

fn eig(a: &SymMat) -> Vec<f64> {
    ordered_eigenvalues(a).0
}

fn n_str(n: usize) -> String {
    n.to_string()
}

/// `trace(A)`; self-dual.
pub fn laplace(n: usize) -> Result<Subequation> {
    check_n("laplace", n)?;
    let name = entry_name("laplace", &[("n", n_str(n))]);
    Ok(Subequation::new(&name, n, |_, j| j.a.trace(), |_, j| j.a.trace())
        .with_dual_name(&name)
        .with_flags(Flags::EIGEN_CONE)
        .with_lipschitz((n as f64).sqrt())
        .with_invariance("O_n"))
}

/// `λ_q(A) ≥ 0`; dual index `n − q + 1`.
pub fn pq(n: usize, q: usize) -> Result<Subequation> {
    check_n("Pq", n)?;
    if q == 0 || q > n {
        return Err(Error::params("Pq", format!("need 1 <= q <= n, got q={q}, n={n}")));
    }
    let qd = n - q + 1;
    Ok(Subequation::new(
        entry_name("Pq", &[("n", n_str(n)), ("q", q.to_string())]),
        n,
        move |_, j| eig(&j.a)[q - 1],
        move |_, j| eig(&j.a)[qd - 1],
    )
    .with_dual_name(entry_name("Pq", &[("n", n_str(n)), ("q", qd.to_string())]))
    .with_flags(Flags::EIGEN_CONE)
    .with_lipschitz(1.0)
    .with_invariance("O_n"))
}

/// `λ_q` of the complex hermitian part on `Cᵐ = R^{2m}`, counted over
/// complex eigenlines.
pub fn pq_complex(m: usize, q: usize) -> Result<Subequation> {
    check_n("Pq_complex", 2 * m)?;
    if q == 0 || q > m {
        return Err(Error::params("Pq_complex", format!("need 1 <= q <= n, got q={q}, n={m}")));
    }
    let qd = m - q + 1;
    let c = ComplexStructure::standard(m);
    let c2 = c.clone();
    let herm = move |c: &ComplexStructure, a: &SymMat| eig(&hermitian_part_complex(a, c).expect("dimension checked"));
    Ok(Subequation::new(
        entry_name("Pq_complex", &[("n", n_str(m)), ("q", q.to_string())]),
        2 * m,
        move |_, j| herm(&c, &j.a)[2 * (q - 1)],
        move |_, j| herm(&c2, &j.a)[2 * (qd - 1)],
    )
    .with_dual_name(entry_name("Pq_complex", &[("n", n_str(m)), ("q", qd.to_string())]))
    .with_flags(Flags { eigen_symmetric: false, ..Flags::EIGEN_CONE })
    .with_lipschitz(1.0)
    .with_invariance("U_n"))
}

/// `λ_q` of the quaternionic hermitian part on `Hᵐ = R^{4m}`.
pub fn pq_quaternionic(m: usize, q: usize) -> Result<Subequation> {
    check_n("Pq_quaternionic", 4 * m)?;
    if q == 0 || q > m {
        return Err(Error::params("Pq_quaternionic", format!("need 1 <= q <= n, got q={q}, n={m}")));
    }
    let qd = m - q + 1;
    let s = QuaternionicStructure::standard(m);
    let s2 = s.clone();
    let herm =
        move |s: &QuaternionicStructure, a: &SymMat| eig(&hermitian_part_quaternionic(a, s).expect("dimension checked"));
    Ok(Subequation::new(
        entry_name("Pq_quaternionic", &[("n", n_str(m)), ("q", q.to_string())]),
        4 * m,
        move |_, j| herm(&s, &j.a)[4 * (q - 1)],
        move |_, j| herm(&s2, &j.a)[4 * (qd - 1)],
    )
    .with_dual_name(entry_name("Pq_quaternionic", &[("n", n_str(m)), ("q", qd.to_string())]))
    .with_flags(Flags { eigen_symmetric: false, ..Flags::EIGEN_CONE })
    .with_lipschitz(1.0)
    .with_invariance("Sp_n Sp_1"))
}

fn check_k(entry: &str, n: usize, k: usize) -> Result<()> {
    check_n(entry, n)?;
    if k == 0 || k > n {
        return Err(Error::params(entry, format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    Ok(())
}

/// `j`-th ascending σ_k-Gårding eigenvalue `≥ 0`; dual index `k − j + 1`.
pub fn sigma_branch(n: usize, k: usize, j: usize) -> Result<Subequation> {
    check_k("sigma_branch", n, k)?;
    if j == 0 || j > k {
        return Err(Error::params("sigma_branch", format!("need 1 <= j <= k, got j={j}, k={k}")));
    }
    let jd = k - j + 1;
    let name = |jj: usize| entry_name("sigma_branch", &[("j", jj.to_string()), ("k", k.to_string()), ("n", n_str(n))]);
    Ok(Subequation::new(
        name(j),
        n,
        move |_, jet| garding_roots_unchecked(&jet.a, k)[j - 1],
        move |_, jet| garding_roots_unchecked(&jet.a, k)[jd - 1],
    )
    .with_dual_name(name(jd))
    .with_flags(Flags::EIGEN_CONE)
    .with_lipschitz(1.0)
    .with_invariance("O_n"))
}

/// `{σ_k(A) ≥ c}` on the closed Gårding cone, with margin
/// `min(g₁, C(n,k) ∏ max(g_j, 0) − c)`.
pub fn sigma_level(n: usize, k: usize, c: f64) -> Result<Subequation> {
    check_k("sigma_level", n, k)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::params("sigma_level", "need c > 0"));
    }
    let lead = binomial(n, k);
    Ok(Subequation::new(
        entry_name("sigma_level", &[("c", fmt_num(c)), ("k", k.to_string()), ("n", n_str(n))]),
        n,
        move |_, jet| {
            let g = garding_roots_unchecked(&jet.a, k);
            g[0].min(lead * g.iter().map(|v| v.max(0.0)).product::<f64>() - c)
        },
        move |_, jet| {
            let g = garding_roots_unchecked(&jet.a, k);
            g[k - 1].max(c - lead * g.iter().map(|v| (-v).max(0.0)).product::<f64>())
        },
    )
    .with_flags(Flags { cone: false, ..Flags::EIGEN_CONE })
    .with_invariance("O_n"))
}

/// `Σ arctan λ_i(A) ≥ c π/2`; dual `c ↦ −c`.
pub fn special_lagrangian(n: usize, c: f64) -> Result<Subequation> {
    check_n("special_lagrangian", n)?;
    if !(c.abs() < n as f64) {
        return Err(Error::params("special_lagrangian", format!("need |c| < n, got c={c}")));
    }
    let name = |cc: f64| entry_name("special_lagrangian", &[("c", fmt_num(cc)), ("n", n_str(n))]);
    let sum = |a: &SymMat| eig(a).iter().map(|l| l.atan()).sum::<f64>();
    Ok(Subequation::new(name(c), n, move |_, j| sum(&j.a) - c * FRAC_PI_2, move |_, j| sum(&j.a) + c * FRAC_PI_2)
        .with_dual_name(name(-c))
        .with_flags(Flags { cone: false, ..Flags::EIGEN_CONE })
        .with_lipschitz((n as f64).sqrt())
        .with_invariance("O_n"))
}

/// `λ₁ + ⋯ + λ_p ≥ 0`; dual `λ_{n−p+1} + ⋯ + λₙ ≥ 0`.
pub fn grassmann_p(n: usize, p: usize) -> Result<Subequation> {
    check_n("grassmann_p", n)?;
    if p == 0 || p > n {
        return Err(Error::params("grassmann_p", format!("need 1 <= p <= n, got p={p}")));
    }
    Ok(Subequation::new(
        entry_name("grassmann_p", &[("n", n_str(n)), ("p", p.to_string())]),
        n,
        move |_, j| eig(&j.a)[..p].iter().sum(),
        move |_, j| eig(&j.a)[n - p..].iter().sum(),
    )
    .with_dual_name(format!("dual({})", entry_name("grassmann_p", &[("n", n_str(n)), ("p", p.to_string())])))
    .with_flags(Flags::EIGEN_CONE)
    .with_lipschitz((p as f64).sqrt())
    .with_invariance("O_n"))
}

/// `min tr_ξ A` over Lagrangian planes of `Cⁿ` (numerical; an upper bound).
pub fn lag(n: usize, starts: usize, seed: u64) -> Result<Subequation> {
    check_n("lag", 2 * n)?;
    let name = entry_name("lag", &[("n", n_str(n)), ("seed", seed.to_string()), ("starts", starts.to_string())]);
    Ok(Subequation::new(
        &name,
        2 * n,
        move |_, j| planes::lagrangian_min(&j.a, starts, seed),
        move |_, j| -planes::lagrangian_min(&-&j.a, starts, seed),
    )
    .with_flags(Flags { eigen_symmetric: false, approximate: true, ..Flags::EIGEN_CONE })
    .with_lipschitz((n as f64).sqrt())
    .with_invariance("U_n"))
}

/// `min tr_ξ A` over associative 3-planes in `R⁷` (numerical; an upper bound).
pub fn calibration_associative(samples: usize, seed: u64) -> Result<Subequation> {
    let name = entry_name("calibration_associative", &[("samples", samples.to_string()), ("seed", seed.to_string())]);
    Ok(Subequation::new(
        &name,
        7,
        move |_, j| planes::associative_min(&j.a, samples, seed),
        move |_, j| -planes::associative_min(&-&j.a, samples, seed),
    )
    .with_flags(Flags { eigen_symmetric: false, approximate: true, ..Flags::EIGEN_CONE })
    .with_lipschitz(3f64.sqrt())
    .with_invariance("G_2"))
}

/// `|p| ≤ 1`.
pub fn eikonal(n: usize) -> Result<Subequation> {
    check_n("eikonal", n)?;
    Ok(Subequation::new(entry_name("eikonal", &[("n", n_str(n))]), n, |_, j| 1.0 - j.p.norm(), |_, j| j.p.norm() - 1.0)
        .with_flags(Flags { reduced: true, constant_coefficient: true, ..Flags::NONE })
        .with_lipschitz(1.0)
        .with_invariance("O_n"))
}

/// `⟨Ap, p⟩/|p|² ≥ 0`, closed up by `λₙ(A) ≥ 0` at `p = 0`; self-dual.
pub fn inf_laplace(n: usize) -> Result<Subequation> {
    check_n("inf_laplace", n)?;
    let name = entry_name("inf_laplace", &[("n", n_str(n))]);
    let m = |_: &[f64], j: &Jet2| {
        let pp = j.p.norm_squared();
        if pp > 0.0 {
            j.a.quad(&j.p) / pp
        } else {
            j.a.max_eigenvalue()
        }
    };
    Ok(Subequation::new(&name, n, m, m)
        .with_dual_name(&name)
        .with_flags(Flags { reduced: true, cone: true, constant_coefficient: true, ..Flags::NONE })
        .with_invariance("O_n"))
}

/// `|p|² tr A + (k − 2)⟨Ap, p⟩ ≥ 0`, `k ≥ 1`; self-dual off `p = 0`.
pub fn p_laplace(n: usize, k: f64) -> Result<Subequation> {
    check_n("p_laplace", n)?;
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::params("p_laplace", format!("need k >= 1 for positivity, got {k}")));
    }
    let name = entry_name("p_laplace", &[("k", fmt_num(k)), ("n", n_str(n))]);
    let m = move |_: &[f64], j: &Jet2| j.p.norm_squared() * j.a.trace() + (k - 2.0) * j.a.quad(&j.p);
    Ok(Subequation::new(&name, n, m, m)
        .with_dual_name(&name)
        .with_flags(Flags { reduced: true, cone: true, constant_coefficient: true, ..Flags::NONE })
        .with_invariance("O_n"))
}

/// `(1 + |p|²) tr A − ⟨Ap, p⟩ ≥ 0`; self-dual.
pub fn minimal_surface(n: usize) -> Result<Subequation> {
    check_n("minimal_surface", n)?;
    let name = entry_name("minimal_surface", &[("n", n_str(n))]);
    let m = |_: &[f64], j: &Jet2| (1.0 + j.p.norm_squared()) * j.a.trace() - j.a.quad(&j.p);
    Ok(Subequation::new(&name, n, m, m)
        .with_dual_name(&name)
        .with_flags(Flags { reduced: true, constant_coefficient: true, ..Flags::NONE })
        .with_invariance("O_n"))
}

/// Principal curvature matrix `(1/ν) E A E` of the graph of a function with
/// gradient `p`, `E = I − p pᵗ/(ν(1+ν))`, `ν = √(1 + |p|²)`.
pub fn graph_curvature_matrix(p: &DVector<f64>, a: &SymMat) -> SymMat {
    let n = p.len();
    let nu = (1.0 + p.norm_squared()).sqrt();
    let e = nalgebra::DMatrix::identity(n, n) - p * p.transpose() / (nu * (1.0 + nu));
    a.congruence(&e).scale(1.0 / nu)
}

/// `S` applied to the principal curvatures of the graph.
pub fn graph_curvature(s: &Subequation) -> Result<Subequation> {
    if !s.flags.eigen_symmetric {
        return Err(Error::params("graph_curvature", "inner entry must be a pure eigenvalue entry"));
    }
    let (m, d) = (s.margin_fn(), s.dual_margin.clone());
    Ok(Subequation::new(
        format!("graph_curvature({})", s.name()),
        s.dim(),
        move |x, j| m(x, &Jet2::pure(graph_curvature_matrix(&j.p, &j.a))),
        move |x, j| d(x, &Jet2::pure(graph_curvature_matrix(&j.p, &j.a))),
    )
    .with_dual_name(format!("graph_curvature({})", s.dual_name()))
    .with_flags(Flags { reduced: true, constant_coefficient: s.flags.constant_coefficient, ..Flags::NONE })
    .with_invariance("O_n"))
}

/// `s(p) = ½|p|^{1/2}(I + P_[p])`, with `P_[p] = 0` at `p = 0`.
pub fn root_gradient_shift(p: &DVector<f64>) -> SymMat {
    let n = p.len();
    let pn = p.norm();
    if pn == 0.0 {
        return SymMat::zeros(n);
    }
    let proj = SymMat::outer(&(p / pn));
    (&SymMat::identity(n) + &proj).scale(0.5 * pn.sqrt())
}

/// `λ₁(A − σ s(p)) ≥ 0` with `σ = ±1`. A subequation with a comparison-failing
/// Dirichlet problem on balls. The exact dual is `λₙ(A + σ s(p)) ≥ 0`;
/// `printed_dual` selects the stronger `λ₁(A + σ s(p)) ≥ 0` instead.
pub fn root_gradient(n: usize, sign: f64, printed_dual: bool) -> Result<Subequation> {
    check_n("root_gradient", n)?;
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::params("root_gradient", "sign must be + or -"));
    }
    let sg = if sign > 0.0 { "+" } else { "-" };
    let dual = if printed_dual { "printed" } else { "exact" };
    // margin is λ₁(A + sign·s(p)) so that sign = − gives A − s(p)
    Ok(Subequation::new(
        entry_name("root_gradient", &[("dual", dual.to_string()), ("n", n_str(n)), ("sign", sg.to_string())]),
        n,
        move |_, j| (&j.a + &root_gradient_shift(&j.p).scale(sign)).min_eigenvalue(),
        move |_, j| {
            let b = &j.a - &root_gradient_shift(&j.p).scale(sign);
            if printed_dual {
                b.min_eigenvalue()
            } else {
                b.max_eigenvalue()
            }
        },
    )
    .with_flags(Flags { reduced: true, constant_coefficient: true, ..Flags::NONE })
    .with_invariance("O_n"))
}

/// `{λ₁(A) ≥ 0, det A ≥ eʳ}` with margin `min(λ₁, ∏ max(λ_i, 0) − eʳ)`.
pub fn monge_ampere_exp(n: usize) -> Result<Subequation> {
    check_n("monge_ampere_exp", n)?;
    Ok(Subequation::new(
        entry_name("monge_ampere_exp", &[("n", n_str(n))]),
        n,
        |_, j| {
            let ev = eig(&j.a);
            ev[0].min(ev.iter().map(|v| v.max(0.0)).product::<f64>() - j.r.exp())
        },
        |_, j| {
            let ev = eig(&j.a);
            ev[ev.len() - 1].max((-j.r).exp() - ev.iter().map(|v| (-v).max(0.0)).product::<f64>())
        },
    )
    .with_flags(Flags { pure_second_order: false, reduced: false, cone: false, ..Flags::EIGEN_CONE })
    .with_invariance("O_n"))
}

/// Growth `F(r)` in the Calabi–Yau type entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    One,
    Exp,
}

impl Growth {
    pub fn eval(self, r: f64) -> f64 {
        match self {
            Growth::One => 1.0,
            Growth::Exp => r.exp(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Growth::One => "one",
            Growth::Exp => "exp",
        }
    }
}

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

fn complex_eigs(c: &ComplexStructure, a: &SymMat) -> Vec<f64> {
    let h = eig(&hermitian_part_complex(a, c).expect("dimension checked"));
    h.iter().step_by(2).copied().collect()
}

/// `{A_C + I ⪰ 0, det_C(A_C + I) ≥ F(r) f(x)}` on `Cᵐ`, margin
/// `min(λ₁(A_C + I), ∏ max(μ_j, 0) − F(r) f(x))` over complex eigenvalues `μ_j`.
pub fn calabi_yau(m: usize, f: ScalarField, growth: Growth, label: &str) -> Result<Subequation> {
    check_n("calabi_yau", 2 * m)?;
    let c = ComplexStructure::standard(m);
    let (c1, c2) = (c.clone(), c);
    let (f1, f2) = (f.clone(), f);
    Ok(Subequation::new(
        entry_name("calabi_yau", &[("f", label.to_string()), ("growth", growth.label().to_string()), ("n", n_str(m))]),
        2 * m,
        move |x, j| {
            let mu: Vec<f64> = complex_eigs(&c1, &j.a).iter().map(|v| v + 1.0).collect();
            mu[0].min(mu.iter().map(|v| v.max(0.0)).product::<f64>() - growth.eval(j.r) * f1(x))
        },
        move |x, j| {
            let mu = complex_eigs(&c2, &j.a);
            let top = mu[mu.len() - 1] - 1.0;
            top.max(growth.eval(-j.r) * f2(x) - mu.iter().map(|v| (1.0 - v).max(0.0)).product::<f64>())
        },
    )
    .with_flags(Flags { reduced: growth == Growth::One, ..Flags::NONE })
    .with_invariance("U_n"))
}

/// Constant right-hand side `f > 0`.
pub fn calabi_yau_const(m: usize, f: f64, growth: Growth) -> Result<Subequation> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::params("calabi_yau", "need f > 0"));
    }
    let mut out = calabi_yau(m, Arc::new(move |_| f), growth, &fmt_num(f))?;
    out.flags.constant_coefficient = true;
    Ok(out)
}

/// Margin of `C_γ(J_c) = {X₀ + t J_c : X₀ ⊥ J_c, γ|X₀| ≤ t}`: `t − γ|X₀|`.
pub fn circular_margin(jc: &Jet2, gamma: f64, j: &Jet2) -> f64 {
    let t = j.inner(jc) / jc.norm_squared();
    let x0 = j.axpy(-t, jc);
    t - gamma * x0.norm()
}

/// Circular cone about `J_c` with inverse cross-section radius `γ`. Must
/// contain `(0, 0, P)` and `(−1, 0, 0)` so that it is a subequation.
pub fn circular_cone(jc: Jet2, gamma: f64) -> Result<Subequation> {
    let n = jc.dim();
    check_n("circular_cone", n)?;
    if !(gamma > 0.0) || jc.norm() == 0.0 {
        return Err(Error::params("circular_cone", "need gamma > 0 and a nonzero axis"));
    }
    let nn = jc.norm_squared();
    // worst unit rank-one direction in A, and the −r direction
    let contains = |t: f64| t > 0.0 && gamma * (1.0 - t * t * nn).max(0.0).sqrt() <= t;
    if !contains(jc.a.min_eigenvalue() / nn) || !contains(-jc.r / nn) {
        return Err(Error::params("circular_cone", "cone does not contain the positivity and negativity directions"));
    }
    let lip = (1.0 / nn + gamma * gamma).sqrt();
    let (ja, jb) = (jc.clone(), jc.clone());
    let name = entry_name(
        "circular_cone",
        &[
            ("a", fmt_num(jc.a.get(0, 0))),
            ("gamma", fmt_num(gamma)),
            ("n", n_str(n)),
            ("p", fmt_num(jc.p[0])),
            ("r", fmt_num(jc.r)),
        ],
    );
    Ok(Subequation::new(name, n, move |_, j| circular_margin(&ja, gamma, j), move |_, j| {
        let t = j.inner(&jb) / nn;
        t + gamma * j.axpy(-t, &jb).norm()
    })
    .with_flags(Flags { cone: true, constant_coefficient: true, ..Flags::NONE })
    .with_lipschitz(lip))
}

/// Entries addressable by name, with their parameter template and defining condition.
pub fn catalog_entries() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("laplace", "laplace:n=<n>", "tr A >= 0 (self-dual)"),
        ("Pq", "Pq:n=<n>,q=<q>", "lambda_q(A) >= 0; dual q -> n-q+1"),
        ("Pq_complex", "Pq_complex:n=<m>,q=<q>", "lambda_q of the complex hermitian part on C^m"),
        ("Pq_quaternionic", "Pq_quaternionic:n=<m>,q=<q>", "lambda_q of the quaternionic hermitian part on H^m"),
        ("sigma_branch", "sigma_branch:j=<j>,k=<k>,n=<n>", "j-th sigma_k Garding eigenvalue >= 0; dual j -> k-j+1"),
        ("sigma_level", "sigma_level:c=<c>,k=<k>,n=<n>", "sigma_k(A) >= c on the Garding cone"),
        ("special_lagrangian", "special_lagrangian:c=<c>,n=<n>", "sum arctan lambda_i >= c pi/2; dual c -> -c"),
        ("grassmann_p", "grassmann_p:n=<n>,p=<p>", "lambda_1 + ... + lambda_p >= 0"),
        ("lag", "lag:n=<n>[,seed=0,starts=64]", "min trace over Lagrangian n-planes in C^n (numerical)"),
        (
            "calibration_associative",
            "calibration_associative[:samples=10000,seed=0]",
            "min trace over associative 3-planes in R^7 (numerical)",
        ),
        ("eikonal", "eikonal:n=<n>", "|p| <= 1"),
        ("inf_laplace", "inf_laplace:n=<n>", "<Ap,p>/|p|^2 >= 0, lambda_n(A) >= 0 at p = 0 (self-dual)"),
        ("p_laplace", "p_laplace:k=<k>,n=<n>", "|p|^2 tr A + (k-2)<Ap,p> >= 0, k >= 1"),
        ("minimal_surface", "minimal_surface:n=<n>", "(1+|p|^2) tr A - <Ap,p> >= 0"),
        ("graph_curvature", "graph_curvature:n=<n>,s=<entry>[,inner keys]", "entry applied to graph principal curvatures"),
        (
            "root_gradient",
            "root_gradient:n=<n>,sign=<+|->[,dual=exact|printed]",
            "lambda_1(A -+ (1/2)|p|^(1/2)(I + P_p)) >= 0",
        ),
        ("monge_ampere_exp", "monge_ampere_exp:n=<n>", "A >= 0 and det A >= e^r"),
        ("calabi_yau", "calabi_yau:f=<f>,growth=<one|exp>,n=<m>", "A_C + I >= 0 and det_C(A_C + I) >= F(r) f"),
        ("circular_cone", "circular_cone:gamma=<g>,n=<n>[,a=1,p=0,r=-1]", "circular cone about (r, p 1, a I)"),
    ]
}

/// Builds an entry from its `name:key=value,…` string.
pub fn catalog_construct(text: &str) -> Result<Subequation> {
    let params = EntryParams::parse(text)?;
    construct(params)
}

fn construct(mut s: EntryParams) -> Result<Subequation> {
    let out = match s.name.as_str() {
        "laplace" => laplace(s.need_int("n")?),
        "Pq" => pq(s.need_int("n")?, s.need_int("q")?),
        "Pq_complex" => pq_complex(s.need_int("n")?, s.need_int("q")?),
        "Pq_quaternionic" => pq_quaternionic(s.need_int("n")?, s.need_int("q")?),
        "sigma_branch" => sigma_branch(s.need_int("n")?, s.need_int("k")?, s.need_int("j")?),
        "sigma_level" => sigma_level(s.need_int("n")?, s.need_int("k")?, s.need_num("c")?),
        "special_lagrangian" => special_lagrangian(s.need_int("n")?, s.need_num("c")?),
        "grassmann_p" => grassmann_p(s.need_int("n")?, s.need_int("p")?),
        "lag" => {
            let n = s.need_int("n")?;
            let seed = s.take_int("seed")?.unwrap_or(0) as u64;
            lag(n, s.take_int("starts")?.unwrap_or(64), seed)
        }
        "calibration_associative" => {
            let seed = s.take_int("seed")?.unwrap_or(0) as u64;
            calibration_associative(s.take_int("samples")?.unwrap_or(10_000), seed)
        }
        "eikonal" => eikonal(s.need_int("n")?),
        "inf_laplace" => inf_laplace(s.need_int("n")?),
        "p_laplace" => p_laplace(s.need_int("n")?, s.need_num("k")?),
        "minimal_surface" => minimal_surface(s.need_int("n")?),
        "graph_curvature" => {
            let inner_name = s.take_str("s").ok_or_else(|| Error::params("graph_curvature", "missing `s`"))?;
            let inner = EntryParams { name: inner_name, params: std::mem::take(&mut s.params) };
            let inner = construct(inner)?;
            graph_curvature(&inner)
        }
        "root_gradient" => {
            let n = s.need_int("n")?;
            let sign = match s.take_str("sign").as_deref() {
                Some("-") | Some("-1") => -1.0,
                Some("+") | Some("1") => 1.0,
                _ => return Err(Error::params("root_gradient", "sign must be + or -")),
            };
            let printed = match s.take_str("dual").as_deref() {
                None | Some("exact") => false,
                Some("printed") => true,
                Some(other) => return Err(Error::params("root_gradient", format!("unknown dual `{other}`"))),
            };
            root_gradient(n, sign, printed)
        }
        "monge_ampere_exp" => monge_ampere_exp(s.need_int("n")?),
        "calabi_yau" => {
            let m = s.need_int("n")?;
            let f = s.take_num("f")?.unwrap_or(1.0);
            let growth = match s.take_str("growth").as_deref() {
                None | Some("one") => Growth::One,
                Some("exp") => Growth::Exp,
                Some(other) => return Err(Error::params("calabi_yau", format!("unknown growth `{other}`"))),
            };
            calabi_yau_const(m, f, growth)
        }
        "circular_cone" => {
            let n = s.need_int("n")?;
            let gamma = s.need_num("gamma")?;
            let a = s.take_num("a")?.unwrap_or(1.0);
            let p = s.take_num("p")?.unwrap_or(0.0);
            let r = s.take_num("r")?.unwrap_or(-1.0);
            check_n("circular_cone", n)?;
            circular_cone(Jet2::from_parts(r, &vec![p; n], SymMat::identity(n).scale(a)), gamma)
        }
        "intersection" => Err(Error::params("intersection", "intersections are built with subeq::intersection")),
        other => return Err(Error::UnknownEntry(other.to_string())),
    }?;
    s.finish()?;
    Ok(out)
}
