//! Property suites as plain functions over a proptest runner, so the same
//! checks run under the default runner and under explicit seeds.

#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use subeq::geometry::{
    boundary_convexity_test, builtin_metric, christoffel, christoffel_fd, frame_transform_jet, framed_jet, metric_compatibility_residual,
    riemannian_hessian, second_fundamental_form, tube, ConvexityOptions, DomainSpec, MetricChart,
};
use subeq::jet::{
    garding_roots_sigma_k, ordered_eigenvalues, pfold_eigen_sums, random, trace_on_basis, trace_on_plane, Jet2, PlaneProjector, SymMat,
};
use subeq::solver::harness::cubic_profile_jet;
use subeq::solver::{discrete_jet, f_subharmonic_test, perron_solve, subharmonic_on, Grid, GridFunction, SolveConfig, SweepMode};
use subeq::subeq::catalog::{self as cat, circular_margin};
use subeq::subeq::{dual, intersection, translate_const, AffineJetMap, MonotoneSet, Subequation};

pub type Prop = fn(&mut TestRunner) -> Result<(), String>;

/// Runner with a fixed seed.
pub fn seeded_runner(seed: u64, cases: u32) -> TestRunner {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::from_seed(RngAlgorithm::ChaCha, &bytes))
}

/// A sub-runner with fewer cases drawing from the parent's stream.
fn sub(runner: &mut TestRunner, cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, runner.new_rng())
}

fn run<S: Strategy>(runner: &mut TestRunner, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner.run(&s, f).map_err(|e| e.to_string())
}

pub fn sym_of(n: usize, v: &[f64]) -> SymMat {
    SymMat::from_fn(n, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        v[a * n + b]
    })
}

/// Symmetric matrices of dimension in `lo..=hi`, entries in `[−4, 4]`.
pub fn sym(lo: usize, hi: usize) -> impl Strategy<Value = SymMat> {
    (lo..=hi).prop_flat_map(|n| prop::collection::vec(-4.0f64..4.0, n * n).prop_map(move |v| sym_of(n, &v)))
}

fn sym_n(n: usize) -> impl Strategy<Value = SymMat> {
    prop::collection::vec(-4.0f64..4.0, n * n).prop_map(move |v| sym_of(n, &v))
}

fn psd_n(n: usize) -> impl Strategy<Value = SymMat> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| {
        let b = DMatrix::from_column_slice(n, n, &v);
        SymMat::symmetrize(&b * b.transpose())
    })
}

fn jet_n(n: usize) -> impl Strategy<Value = Jet2> {
    (-3.0f64..3.0, prop::collection::vec(-3.0f64..3.0, n), sym_n(n)).prop_map(|(r, p, a)| Jet2 { r, p: DVector::from_vec(p), a })
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Result<(), TestCaseError> {
    if (a - b).abs() <= tol {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{what}: {a} vs {b} (tol {tol:e})")))
    }
}

fn ensure(ok: bool, what: impl Into<String>) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(what.into()))
    }
}

// ---- jet_core -------------------------------------------------------------

pub fn eigen_monotone(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=6).prop_flat_map(|n| (sym_n(n), psd_n(n))), |(a, p)| {
        let (ea, eb) = (ordered_eigenvalues(&a), ordered_eigenvalues(&(&a + &p)));
        for k in 0..a.dim() {
            ensure(eb.0[k] >= ea.0[k] - 1e-10, format!("lambda_{} decreased", k + 1))?;
        }
        Ok(())
    })
}

pub fn branch_duality(r: &mut TestRunner) -> Result<(), String> {
    run(r, sym(2, 8), |a| {
        let n = a.dim();
        let (e, en) = (ordered_eigenvalues(&a), ordered_eigenvalues(&-&a));
        for q in 1..=n {
            close(en.lambda(q), -e.lambda(n - q + 1), 1e-10, "lambda_q(-A)")?;
        }
        Ok(())
    })
}

pub fn orthogonal_invariance(r: &mut TestRunner) -> Result<(), String> {
    run(r, (sym(2, 7), any::<u64>()), |(a, seed)| {
        let q = random::orthogonal(a.dim(), &mut random::rng(seed));
        let b = a.congruence(&q);
        let (e, f) = (ordered_eigenvalues(&a), ordered_eigenvalues(&b));
        for k in 0..a.dim() {
            close(e.0[k], f.0[k], 1e-9, "conjugated spectrum")?;
        }
        Ok(())
    })
}

pub fn plane_trace_consistency(r: &mut TestRunner) -> Result<(), String> {
    run(r, (sym(2, 7), any::<u64>(), 0.0f64..1.0), |(a, seed, frac)| {
        let n = a.dim();
        let p = 1 + ((n - 1) as f64 * frac) as usize;
        let w = random::orthogonal(n, &mut random::rng(seed)).columns(0, p).into_owned();
        let xi = PlaneProjector::from_basis(&w).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let t1 = trace_on_plane(&a, &xi).map_err(|e| TestCaseError::fail(e.to_string()))?;
        close(t1, trace_on_basis(&a, &w), 1e-10, "plane trace")
    })
}

pub fn garding_shift(r: &mut TestRunner) -> Result<(), String> {
    run(r, (sym(2, 6), 0.0f64..1.0, -3.0f64..3.0), |(a, frac, t)| {
        let n = a.dim();
        let k = 1 + ((n - 1) as f64 * frac).round() as usize;
        let g = garding_roots_sigma_k(&a, k).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let gt = garding_roots_sigma_k(&a.add_identity(t), k).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for (x, y) in g.iter().zip(&gt) {
            close(*y, x + t, 1e-9, "shifted Garding root")?;
        }
        Ok(())
    })
}

pub fn pfold_negation(r: &mut TestRunner) -> Result<(), String> {
    run(r, (sym(1, 6), 0.0f64..1.0), |(a, frac)| {
        let n = a.dim();
        let p = 1 + ((n - 1) as f64 * frac).round() as usize;
        let s = pfold_eigen_sums(&a, p).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let sn = pfold_eigen_sums(&-&a, p).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for (x, y) in sn.iter().zip(s.iter().rev()) {
            close(*x, -y, 1e-10, "p-fold sums of -A")?;
        }
        Ok(())
    })
}

// ---- subeq_catalog ---------------------------------------------------------

/// Exact (non-approximate) entries used by the catalog properties.
pub fn exact_entries(n: usize) -> Vec<Subequation> {
    let mut v = vec![
        cat::laplace(n).unwrap(),
        cat::special_lagrangian(n, 0.5).unwrap(),
        cat::eikonal(n).unwrap(),
        cat::inf_laplace(n).unwrap(),
        cat::p_laplace(n, 3.0).unwrap(),
        cat::p_laplace(n, 1.0).unwrap(),
        cat::minimal_surface(n).unwrap(),
        cat::root_gradient(n, -1.0, false).unwrap(),
        cat::root_gradient(n, 1.0, true).unwrap(),
        cat::monge_ampere_exp(n).unwrap(),
        cat::graph_curvature(&cat::pq(n, 1).unwrap()).unwrap(),
        cat::sigma_level(n, 2.min(n), 0.5).unwrap(),
    ];
    for q in 1..=n {
        v.push(cat::pq(n, q).unwrap());
        v.push(cat::grassmann_p(n, q).unwrap());
    }
    for k in 1..=n.min(3) {
        for j in 1..=k {
            v.push(cat::sigma_branch(n, k, j).unwrap());
        }
    }
    if n % 2 == 0 {
        v.push(cat::pq_complex(n / 2, 1).unwrap());
        v.push(cat::calabi_yau_const(n / 2, 1.5, cat::Growth::Exp).unwrap());
    }
    if n == 4 {
        v.push(cat::pq_quaternionic(1, 1).unwrap());
    }
    let jc = Jet2 { r: -1.0, p: DVector::zeros(n), a: SymMat::identity(n) };
    v.push(cat::circular_cone(jc, 0.2).unwrap());
    v
}

fn check_pn(f: &Subequation, x: &[f64], j: &Jet2, p: &SymMat, s: f64, slack: f64) -> Result<(), TestCaseError> {
    let m = f.margin(x, j);
    let mp = f.margin(x, &Jet2 { a: &j.a + p, ..j.clone() });
    let dual = dual(f);
    let d = dual.margin(x, j);
    let dp = dual.margin(x, &Jet2 { a: &j.a + p, ..j.clone() });
    ensure(mp >= m - slack * (1.0 + m.abs()), format!("(P) fails for {}: {m} -> {mp}", f.name()))?;
    ensure(dp >= d - slack * (1.0 + d.abs()), format!("(P) fails for dual of {}: {d} -> {dp}", f.name()))?;
    let mn = f.margin(x, &j.with_r(j.r - s));
    ensure(mn >= m - slack * (1.0 + m.abs()), format!("(N) fails for {}: {m} -> {mn}", f.name()))?;
    let dn = dual.margin(x, &j.with_r(j.r - s));
    ensure(dn >= d - slack * (1.0 + d.abs()), format!("(N) fails for dual of {}: {d} -> {dn}", f.name()))
}

pub fn positivity_negativity(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=4).prop_flat_map(|n| (jet_n(n), psd_n(n), 0.0f64..3.0)), |(j, p, s)| {
        let n = j.dim();
        let x = vec![0.1; n];
        for f in exact_entries(n) {
            check_pn(&f, &x, &j, &p, s, 1e-9)?;
        }
        Ok(())
    })
}

pub fn positivity_negativity_approximate(r: &mut TestRunner) -> Result<(), String> {
    let mut r = sub(r, 6);
    run(&mut r, (jet_n(4), psd_n(4), 0.0f64..3.0), |(j, p, s)| {
        let f = cat::lag(2, 16, 3).unwrap();
        check_pn(&f, &[0.0; 4], &j, &p, s, 1e-6)
    })
}

pub fn duality_involution(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=4).prop_flat_map(jet_n), |j| {
        let n = j.dim();
        let x = vec![0.2; n];
        for f in exact_entries(n) {
            let dd = dual(&dual(&f));
            ensure(dd.margin(&x, &j).to_bits() == f.margin(&x, &j).to_bits(), format!("double dual of {}", f.name()))?;
            ensure(dd.name() == f.name(), "double dual name")?;
        }
        Ok(())
    })
}

pub fn negation_coherence(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=5).prop_flat_map(jet_n), |j| {
        let n = j.dim();
        let x = vec![0.0; n];
        let mut fs = vec![cat::special_lagrangian(n, 0.7).unwrap(), cat::special_lagrangian(n, -1.2).unwrap()];
        for q in 1..=n {
            fs.push(cat::pq(n, q).unwrap());
            fs.push(cat::grassmann_p(n, q).unwrap());
        }
        for k in 1..=n.min(4) {
            for i in 1..=k {
                fs.push(cat::sigma_branch(n, k, i).unwrap());
            }
        }
        for f in fs {
            let neg = f.margin(&x, &-&j);
            if neg.abs() > 1e-6 {
                let d = dual(&f).margin(&x, &j);
                ensure((d > 0.0) == (-neg > 0.0), format!("{}: hand dual {d} vs negation {}", f.name(), -neg))?;
            }
        }
        Ok(())
    })
}

pub fn intersection_duality(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=4).prop_flat_map(|n| (jet_n(n), 1..=n)), |(j, q)| {
        let n = j.dim();
        let x = vec![0.0; n];
        let f = intersection(&cat::pq(n, q).unwrap(), &cat::special_lagrangian(n, 0.3).unwrap()).unwrap();
        let neg = f.margin(&x, &-&j);
        if neg.abs() > 1e-6 {
            let d = dual(&f).margin(&x, &j);
            ensure((d > 0.0) == (-neg > 0.0), format!("intersection dual {d} vs {}", -neg))?;
        }
        Ok(())
    })
}

pub fn translate_dual(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=4).prop_flat_map(|n| (jet_n(n), jet_n(n))), |(j, j0)| {
        let n = j.dim();
        let x = vec![0.0; n];
        for f in [cat::pq(n, 1).unwrap(), cat::special_lagrangian(n, 0.0).unwrap(), cat::monge_ampere_exp(n).unwrap()] {
            let a = dual(&translate_const(&f, j0.clone())).margin(&x, &j);
            let b = translate_const(&dual(&f), -&j0).margin(&x, &j);
            if a.abs() > 1e-9 || b.abs() > 1e-9 {
                ensure((a > 0.0) == (b > 0.0), format!("{}: {a} vs {b}", f.name()))?;
            }
        }
        Ok(())
    })
}

pub fn strict_approximation(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=5).prop_flat_map(|n| (sym_n(n), 1..=n)), |(a, q)| {
        let n = a.dim();
        let x = vec![0.0; n];
        let j = Jet2::pure(a.clone());
        for eps in [1e-3, 1e-2, 1e-1] {
            let js = Jet2::pure(a.add_identity(2.0 * eps));
            for f in [cat::pq(n, q).unwrap(), cat::grassmann_p(n, q).unwrap()] {
                let gain = f.margin(&x, &js) - f.margin(&x, &j);
                ensure(gain >= 2.0 * eps - 1e-12, format!("{}: gain {gain} < {}", f.name(), 2.0 * eps))?;
            }
            let sl = cat::special_lagrangian(n, 0.0).unwrap();
            let lmax = ordered_eigenvalues(&a).0.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 2.0 * eps;
            let gain = sl.margin(&x, &js) - sl.margin(&x, &j);
            ensure(gain >= 2.0 * eps / (1.0 + lmax * lmax) - 1e-12, format!("special Lagrangian gain {gain}"))?;
        }
        Ok(())
    })
}

pub fn cone_scaling(r: &mut TestRunner) -> Result<(), String> {
    run(r, ((2usize..=4).prop_flat_map(jet_n), 0.01f64..100.0), |(j, t)| {
        let n = j.dim();
        let x = vec![0.0; n];
        for f in exact_entries(n).into_iter().filter(|f| f.flags.cone) {
            let (m, mt) = (f.margin(&x, &j), f.margin(&x, &j.scale(t)));
            if m.abs() > 1e-9 * (1.0 + j.norm()) {
                ensure((m > 0.0) == (mt > 0.0), format!("{}: sign changed under scaling by {t}", f.name()))?;
            }
        }
        Ok(())
    })
}

pub fn monotone_cone_convexity(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=4, any::<u64>(), 0.05f64..3.0), |(n, seed, gamma)| {
        let x = vec![0.0; n];
        let mut rng = random::rng(seed);
        let axis = Jet2 { r: -1.0, p: DVector::zeros(n), a: SymMat::identity(n) };
        for m in [MonotoneSet::psd_cone(n), MonotoneSet::negative_psd_cone(n), MonotoneSet::circular(axis.clone(), gamma)] {
            let (j1, j2) = (m.sample(&mut rng), m.sample(&mut rng));
            let (m1, m2) = (m.margin(&x, &j1), m.margin(&x, &j2));
            ensure(m1 >= -1e-9 && m2 >= -1e-9, format!("{} sampler left the set", m.name))?;
            let s = m.margin(&x, &(&j1 + &j2));
            ensure(s >= m1.min(m2) - 1e-9, format!("{} not closed under addition", m.name))?;
            let t = 0.1 + (seed % 97) as f64;
            ensure(m.margin(&x, &j1.scale(t)) >= -1e-9, format!("{} not closed under scaling", m.name))?;
        }
        Ok(())
    })
}

pub fn affine_roundtrip(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=4).prop_flat_map(|n| (jet_n(n), jet_n(n), any::<u64>())), |(j, j0, seed)| {
        let n = j.dim();
        let mut rng = random::rng(seed);
        let g = random::orthogonal(n, &mut rng) * 2.0 + DMatrix::identity(n, n) * 0.1;
        let h = random::orthogonal(n, &mut rng) + DMatrix::identity(n, n) * 0.3;
        let l: Vec<SymMat> = (0..n).map(|_| random::sym(n, &mut rng)).collect();
        let Ok(phi) = AffineJetMap::constant(g, h, l, j0) else { return Ok(()) };
        let x = vec![0.0; n];
        let back = phi.inverse_apply(&x, &phi.apply(&x, &j)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure(subeq::jet::jet_distance(&back, &j) <= 1e-10 * (1.0 + j.norm()), "affine inverse")
    })
}

pub fn circular_graph_lipschitz(r: &mut TestRunner) -> Result<(), String> {
    // over J_c⊥ the boundary of C_γ(J_c) is y ↦ y + γ|y| J_c, and γ|y| is γ-Lipschitz
    run(r, ((2usize..=3).prop_flat_map(|n| (jet_n(n), jet_n(n), jet_n(n))), 0.1f64..3.0), |((jc, x1, x2), gamma)| {
        if jc.norm() < 1e-3 {
            return Ok(());
        }
        let nn = jc.norm_squared();
        let perp = |j: &Jet2| j.axpy(-j.inner(&jc) / nn, &jc);
        let (y1, y2) = (perp(&x1), perp(&x2));
        let (g1, g2) = (gamma * y1.norm(), gamma * y2.norm());
        close(circular_margin(&jc, gamma, &y1.axpy(g1, &jc)), 0.0, 1e-9 * (1.0 + g1), "graph point on the boundary")?;
        ensure((g1 - g2).abs() <= gamma * jet_dist(&y1, &y2) + 1e-12, "graphing function not gamma-Lipschitz")
    })
}

fn jet_dist(a: &Jet2, b: &Jet2) -> f64 {
    subeq::jet::jet_distance(a, b)
}

// ---- geometry --------------------------------------------------------------

pub fn christoffel_compatibility(r: &mut TestRunner) -> Result<(), String> {
    let s3 = Arc::new(builtin_metric("s3_tube").unwrap());
    let s33 = Arc::new(builtin_metric("s3xs3_tube").unwrap());
    run(r, (0.05f64..1.5, 0.1f64..6.0, 0.1f64..6.0, 0.05f64..1.5), move |(d, t, f, d2)| {
        let x = vec![d, t, f];
        let y = vec![d, t, f, d2, f, t];
        for (m, p) in [(&*s3, &x), (&*s33, &y)] {
            let g = christoffel(m, p).map_err(|e| TestCaseError::fail(e.to_string()))?;
            ensure(g.symmetry_defect() <= 1e-10, "Christoffel symmetry")?;
            let res = metric_compatibility_residual(m, p).map_err(|e| TestCaseError::fail(e.to_string()))?;
            ensure(res <= 1e-6, format!("compatibility residual {res:e}"))?;
            let fd = christoffel_fd(m, p).map_err(|e| TestCaseError::fail(e.to_string()))?;
            ensure(fd.max_abs_diff(&g) <= 1e-6, format!("analytic vs finite differences {:e}", fd.max_abs_diff(&g)))?;
        }
        Ok(())
    })
}

pub fn frame_covariance(r: &mut TestRunner) -> Result<(), String> {
    let m = Arc::new(builtin_metric("s3_tube").unwrap());
    run(r, (0.05f64..1.5, 0.0f64..6.0, jet_n(3), any::<u64>()), move |(d, t, j, seed)| {
        let x = vec![d, t, 1.0];
        let h = random::orthogonal(3, &mut random::rng(seed)) + DMatrix::identity(3, 3) * 0.5;
        // hessian then frame
        let a = frame_transform_jet(&riemannian_hessian(&m, &x, &j).unwrap(), &h).map_err(|e| TestCaseError::fail(e.to_string()))?;
        // frame then hessian: h D²u hᵗ − h Γ(Du) hᵗ
        let jt = frame_transform_jet(&j, &h).unwrap();
        let gam = christoffel(&m, &x).unwrap().apply(&j.p).congruence(&h);
        let b = Jet2 { a: &jt.a - &gam, ..jt };
        ensure(jet_dist(&a, &b) <= 1e-9 * (1.0 + j.norm()), format!("frame covariance {:e}", jet_dist(&a, &b)))
    })
}

pub fn half_distance_hessian_at_center(r: &mut TestRunner) -> Result<(), String> {
    let m = Arc::new(builtin_metric("s3_tube").unwrap());
    run(r, (0.3f64..1.2, 0.5f64..5.5, 0.5f64..5.5, prop::collection::vec(-1.0f64..1.0, 3)), move |(d, t, f, c)| {
        // Euclidean: ½|x − x₀|² has hessian I exactly
        let e = MetricChart::euclidean(3).unwrap();
        let x0 = [c[0], c[1], c[2]];
        let jet = subeq::geometry::fd_jet(&|x: &[f64]| 0.5 * x.iter().zip(&x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), &x0);
        let fe = framed_jet(&e, &x0, &jet).unwrap();
        ensure((&fe.a - &SymMat::identity(3)).frobenius() <= 1e-6, "Euclidean half distance")?;
        // S³: geodesic distance from x₀ via the embedding
        let p0 = s3(&[d, t, f]);
        let half = |x: &[f64]| {
            let p = s3(x);
            let c: f64 = p.iter().zip(&p0).map(|(a, b)| a * b).sum();
            let s = p.iter().zip(&p0).map(|(a, b)| (a - c * b).powi(2)).sum::<f64>().sqrt();
            0.5 * s.atan2(c).powi(2)
        };
        let xs = [d, t, f];
        let jf = framed_jet(&m, &xs, &subeq::geometry::fd_jet(&half, &xs)).unwrap();
        ensure((&jf.a - &SymMat::identity(3)).frobenius() <= 1e-3, format!("S3 half distance drift {:e}", (&jf.a - &SymMat::identity(3)).frobenius()))
    })
}

fn s3(x: &[f64]) -> [f64; 4] {
    let (d, t, f) = (x[0], x[1], x[2]);
    [d.cos() * t.cos(), d.cos() * t.sin(), d.sin() * f.cos(), d.sin() * f.sin()]
}

pub fn torus_ii_product(r: &mut TestRunner) -> Result<(), String> {
    let m = Arc::new(builtin_metric("s3_tube").unwrap());
    run(r, (0.05f64..1.5, 0.0f64..6.2, 0.0f64..6.2), move |(s, t, f)| {
        let bd = second_fundamental_form(&m, &tube::torus_domain(s), &[s, t, f]).unwrap();
        let e = bd.ii_eigenvalues();
        close(e[0] * e[1], -1.0, 1e-5, "II eigenvalue product")
    })
}

pub fn convexity_monotone_in_q(r: &mut TestRunner) -> Result<(), String> {
    run(
        r,
        (2usize..=4).prop_flat_map(|n| (prop::collection::vec(-1.0f64..1.0, n), 0.3f64..2.0, prop::collection::vec(-1.0f64..1.0, n), 0.3f64..3.0)),
        |(center, radius, dir, scale)| {
            let n = center.len();
            let v = DVector::from_vec(dir);
            if v.norm() < 1e-3 {
                return Ok(());
            }
            // ellipsoid (x−c)ᵗ D (x−c) < R² with D = diag(1, scale, 1, …)
            let cc = center.clone();
            let dom = DomainSpec::from_fn("ellipsoid", move |x| {
                x.iter().zip(&cc).enumerate().map(|(i, (a, b))| if i == 1 { scale } else { 1.0 } * (a - b) * (a - b)).sum::<f64>() - radius * radius
            });
            let u = &v / v.norm();
            let x: Vec<f64> = (0..n).map(|i| center[i] + radius * u[i] / if i == 1 { scale.sqrt() } else { 1.0 }).collect();
            let e = MetricChart::euclidean(n).unwrap();
            let mut prev = false;
            for q in 1..=n {
                let v = boundary_convexity_test(&cat::pq(n, q).unwrap(), &e, &dom, &x, &[-1.0, 0.0, 1.0], &ConvexityOptions::default())
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                let yes = v.iter().all(|c| c.verdict.is_yes());
                ensure(!prev || yes, format!("strict P{}-convexity lost at q = {q}", q - 1))?;
                prev = yes;
            }
            Ok(())
        },
    )
}

// ---- solver ----------------------------------------------------------------

fn quad_fn(c: [f64; 6]) -> impl Fn(&[f64]) -> f64 {
    move |x: &[f64]| c[0] * x[0] * x[0] + c[1] * x[0] * x[1] + c[2] * x[1] * x[1] + c[3] * x[0] + c[4] * x[1] + c[5]
}

pub fn update_monotonicity(r: &mut TestRunner) -> Result<(), String> {
    let e = Arc::new(MetricChart::euclidean(2).unwrap());
    let g = Arc::new(Grid::unit_cube(2, 7).unwrap());
    run(r, (prop::collection::vec(-2.0f64..2.0, 49), any::<prop::sample::Index>()), move |(vals, idx)| {
        let nodes: Vec<usize> = g.interior_nodes().collect();
        let node = nodes[idx.index(nodes.len())];
        let fs = [cat::laplace(2).unwrap(), cat::pq(2, 1).unwrap(), cat::special_lagrangian(2, 0.4).unwrap(), cat::monge_ampere_exp(2).unwrap()];
        for f in &fs {
            let mut prev = f64::INFINITY;
            for k in -8..=8 {
                let mut v = vals.clone();
                v[node] += 0.25 * k as f64;
                let u = GridFunction::new(&g, v).unwrap();
                let m = f.margin(&g.coords(node), &discrete_jet(&u, &g, &e, node).unwrap());
                ensure(m <= prev + 1e-9 * (1.0 + prev.abs().min(1e12)), format!("{}: margin increased with the center value", f.name()))?;
                prev = m;
            }
        }
        Ok(())
    })
}

pub fn perron_output_subharmonic(r: &mut TestRunner) -> Result<(), String> {
    let mut r = sub(r, 4);
    let e = Arc::new(MetricChart::euclidean(2).unwrap());
    let g = Arc::new(Grid::unit_cube(2, 9).unwrap());
    run(&mut r, (prop::array::uniform6(-1.0f64..1.0), -0.8f64..0.8), move |(c, sl)| {
        let phi = GridFunction::from_fn(&g, quad_fn(c));
        let cfg = SolveConfig { relaxation: 1.5, ..Default::default() };
        for f in [cat::laplace(2).unwrap(), cat::special_lagrangian(2, sl).unwrap()] {
            let (u, rep) = perron_solve(&f, &e, &g, &phi, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let t = f_subharmonic_test(&u, &g, &f, &e, cfg.tol_residual).unwrap();
            ensure(rep.converged && t.pass, format!("{}: converged {} min margin {}", f.name(), rep.converged, t.min_margin))?;
        }
        Ok(())
    })
}

pub fn maximum_property(r: &mut TestRunner) -> Result<(), String> {
    let e = Arc::new(MetricChart::euclidean(2).unwrap());
    let g = Arc::new(Grid::unit_cube(2, 21).unwrap());
    run(r, (prop::array::uniform3(-1.0f64..1.0), prop::array::uniform3(-0.5f64..0.5), prop::array::uniform3(-0.3f64..0.3)), move |(m, q, l)| {
        // u = xᵗMx with M ⪰ I; v = u + d with |∇d| ≤ 1 and |D²d| ≤ ½ on the
        // unit square, so a stencil meets the crease only if |u − v| < 2(h + h²)
        let cu = [1.0 + m[0] * m[0], 2.0 * m[0] * m[1], 1.0 + m[1] * m[1] + m[2] * m[2], 0.0, 0.0, 0.0];
        let cv = [cu[0] + 0.25 * q[0], cu[1] + 0.25 * q[1], cu[2] + 0.25 * q[2], l[0], l[1], l[2] - 0.1];
        let u = GridFunction::from_fn(&g, quad_fn(cu));
        let v = GridFunction::from_fn(&g, quad_fn(cv));
        let w = u.zip_with(&v, f64::max).unwrap();
        let h = g.spacing()[0];
        let gap = 2.0 * (h + h * h);
        let f = cat::pq(2, 1).unwrap();
        let rep = subharmonic_on(&w, &g, &f, &e, 1e-9, |k| (u.values[k] - v.values[k]).abs() >= gap).unwrap();
        ensure(rep.pass, format!("max(u, v) fails away from the crease: {:?}", rep.witness))
    })
}

pub fn decreasing_sequence(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=4).prop_flat_map(jet_n), |j| {
        let n = j.dim();
        let x = vec![0.0; n];
        for f in [cat::monge_ampere_exp(n).unwrap(), cat::calabi_yau_const(1, 1.0, cat::Growth::Exp).unwrap()] {
            if f.dim() != n {
                continue;
            }
            let m = f.margin(&x, &j);
            let mut prev = f64::NEG_INFINITY;
            for k in [1.0, 10.0, 1e3, 1e6, 1e9, 1e12] {
                let mk = f.margin(&x, &j.with_r(j.r + 1.0 / k));
                ensure(mk >= prev - 1e-12, "margins along u + 1/j not nondecreasing")?;
                prev = mk;
            }
            close(prev, m, 1e-9 * (1.0 + m.abs()), "limit margin")?;
        }
        Ok(())
    })
}

pub fn cubic_profile_identity(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=4).prop_flat_map(|n| (prop::collection::vec(-1.0f64..1.0, n), 0.0f64..1.0, 0.5f64..3.0)), |(dir, rad, big_r)| {
        let v = DVector::from_vec(dir);
        if v.norm() < 1e-6 {
            return Ok(());
        }
        let x: Vec<f64> = (&v * (rad * big_r / v.norm())).iter().copied().collect();
        let jv = cubic_profile_jet(big_r, &x);
        let s = cat::root_gradient_shift(&jv.p);
        let res = (&jv.a + &s).frobenius();
        ensure(res <= 1e-12 * (1.0 + jv.a.frobenius()), format!("A + s(p) = {res:e}"))
    })
}

pub fn uniqueness_witness(r: &mut TestRunner) -> Result<(), String> {
    run(r, (2usize..=4).prop_flat_map(|n| (prop::collection::vec(-1.0f64..1.0, n), 0.0f64..1.0)), |(dir, rad)| {
        let n = dir.len();
        let f = cat::root_gradient(n, -1.0, false).unwrap();
        let v = DVector::from_vec(dir);
        let x: Vec<f64> = if v.norm() < 1e-9 { vec![0.0; n] } else { (&v * (rad / v.norm())).iter().copied().collect() };
        let zero = Jet2::zero(n);
        close(f.margin(&x, &zero), 0.0, 0.0, "margin of U = 0")?;
        let jv = cubic_profile_jet(1.0, &x);
        close(f.margin(&x, &-&jv), 0.0, 1e-12, "margin of -V")?;
        // identical boundary data: V vanishes on |x| = R
        close(cubic_profile_jet(1.0, &(&v / v.norm().max(1e-300)).iter().copied().collect::<Vec<_>>()).r, 0.0, 1e-15, "V on the sphere")
    })
}

pub fn solver_determinism(r: &mut TestRunner) -> Result<(), String> {
    let mut r = sub(r, 3);
    let e = Arc::new(MetricChart::euclidean(2).unwrap());
    let g = Arc::new(Grid::unit_cube(2, 9).unwrap());
    run(&mut r, prop::array::uniform6(-1.0f64..1.0), move |c| {
        let phi = GridFunction::from_fn(&g, quad_fn(c));
        let f = cat::special_lagrangian(2, 0.2).unwrap();
        let cfg = SolveConfig { relaxation: 1.4, ..Default::default() };
        let (u1, r1) = perron_solve(&f, &e, &g, &phi, &cfg).unwrap();
        let (u2, r2) = perron_solve(&f, &e, &g, &phi, &cfg).unwrap();
        ensure(u1.values.iter().zip(&u2.values).all(|(a, b)| a.to_bits() == b.to_bits()), "outputs differ")?;
        ensure(r1.sweeps == r2.sweeps && r1.max_margin_residual.to_bits() == r2.max_margin_residual.to_bits(), "reports differ")
    })
}

pub fn sequential_parallel_agreement(r: &mut TestRunner) -> Result<(), String> {
    let mut r = sub(r, 2);
    let e = Arc::new(MetricChart::euclidean(2).unwrap());
    let g = Arc::new(Grid::unit_cube(2, 17).unwrap());
    run(&mut r, prop::array::uniform6(-1.0f64..1.0), move |c| {
        let phi = GridFunction::from_fn(&g, quad_fn(c));
        let f = cat::special_lagrangian(2, 0.0).unwrap();
        let seq = SolveConfig { relaxation: 1.6, ..Default::default() };
        let par = SolveConfig { mode: SweepMode::ParallelJacobi, relaxation: 1.0, ..Default::default() };
        let (us, rs) = perron_solve(&f, &e, &g, &phi, &seq).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let (up, rp) = perron_solve(&f, &e, &g, &phi, &par).map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure(rs.converged && rp.converged, "both modes converge")?;
        let tol = 10.0 * seq.tol_residual;
        for k in g.interior_nodes() {
            let x = g.coords(k);
            let ms = f.margin(&x, &discrete_jet(&us, &g, &e, k).unwrap());
            let mp = f.margin(&x, &discrete_jet(&up, &g, &e, k).unwrap());
            ensure((ms - mp).abs() <= tol, format!("margins differ at node {k}: {ms} vs {mp}"))?;
        }
        Ok(())
    })
}

/// Every property, by module.
pub fn all() -> Vec<(&'static str, &'static str, Prop)> {
    vec![
        ("jet_core", "eigenvalue monotonicity", eigen_monotone),
        ("jet_core", "branch duality", branch_duality),
        ("jet_core", "orthogonal invariance", orthogonal_invariance),
        ("jet_core", "plane trace consistency", plane_trace_consistency),
        ("jet_core", "Garding root shift", garding_shift),
        ("jet_core", "p-fold negation", pfold_negation),
        ("subeq_catalog", "(P) and (N)", positivity_negativity),
        ("subeq_catalog", "(P) and (N), approximate entries", positivity_negativity_approximate),
        ("subeq_catalog", "double dual identity", duality_involution),
        ("subeq_catalog", "negation rule coherence", negation_coherence),
        ("subeq_catalog", "intersection duality", intersection_duality),
        ("subeq_catalog", "translate and dual", translate_dual),
        ("subeq_catalog", "strict approximation", strict_approximation),
        ("subeq_catalog", "cone scaling", cone_scaling),
        ("subeq_catalog", "monotone cone superadditivity", monotone_cone_convexity),
        ("subeq_catalog", "affine map inverse", affine_roundtrip),
        ("subeq_catalog", "circular cone graph", circular_graph_lipschitz),
        ("geometry", "Christoffel symmetry and compatibility", christoffel_compatibility),
        ("geometry", "frame covariance", frame_covariance),
        ("geometry", "half distance hessian at the center", half_distance_hessian_at_center),
        ("geometry", "torus II product", torus_ii_product),
        ("geometry", "convexity monotone in q", convexity_monotone_in_q),
        ("solver", "update monotonicity", update_monotonicity),
        ("solver", "Perron output subharmonic", perron_output_subharmonic),
        ("solver", "maximum property", maximum_property),
        ("solver", "decreasing sequence", decreasing_sequence),
        ("solver", "cubic profile identity", cubic_profile_identity),
        ("solver", "uniqueness failure witness", uniqueness_witness),
        ("solver", "determinism", solver_determinism),
        ("solver", "sequential and parallel agreement", sequential_parallel_agreement),
    ]
}
