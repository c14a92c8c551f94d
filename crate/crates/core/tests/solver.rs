use std::f64::consts::PI;

use subeq::geometry::tube::{half_delta_sq_jet, TubePairFields};
use subeq::geometry::{builtin_metric, framed_jet, DomainSpec, MetricChart};
use subeq::jet::random;
use subeq::solver::harness::{cubic_profile_jet, tube_counterexample_harness, TubeHarnessOptions};
use subeq::solver::*;
use subeq::subeq::catalog::{eikonal, laplace, pq, root_gradient, root_gradient_shift, special_lagrangian};
use subeq::subeq::dual;
use subeq::Error;

fn max_err(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn discrete_jets_are_exact_on_quadratics() {
    let g = Grid::new(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0], &[9, 9, 9], None).unwrap();
    let e = MetricChart::euclidean(3).unwrap();
    let affine = GridFunction::from_fn(&g, |x| 1.0 + 2.0 * x[0] - 3.0 * x[1] + 0.5 * x[2]);
    let mut rng = random::rng(50);
    let q = random::sym(3, &mut rng);
    let quad = GridFunction::from_fn(&g, |x| {
        let v = nalgebra::DVector::from_column_slice(x);
        0.5 * q.quad(&v)
    });
    for node in g.interior_nodes() {
        let ja = discrete_jet(&affine, &g, &e, node).unwrap();
        assert!(ja.a.frobenius() < 1e-13);
        assert!((ja.p[1] + 3.0).abs() < 1e-13);
        let jq = discrete_jet(&quad, &g, &e, node).unwrap();
        assert!((&jq.a - &q).frobenius() < 1e-12);
    }
    assert!(discrete_jet(&affine, &g, &e, 0).is_err());
}

#[test]
fn discrete_tube_jet_matches_analytic() {
    let m = builtin_metric("s3xs3_tube").unwrap();
    let h = 1e-2;
    let lo = [0.3, 1.0, 2.0, 0.6, 0.5, 0.2];
    let hi: Vec<f64> = lo.iter().map(|v| v + 2.0 * h).collect();
    let g = Grid::new(&lo, &hi, &[3; 6], None).unwrap();
    let u = GridFunction::from_fn(&g, |x| 0.5 * x[0] * x[0]);
    let node = g.interior_nodes().next().unwrap();
    let x = g.coords(node);
    let dj = framed_discrete_jet(&u, &g, &m, node).unwrap();
    let aj = framed_jet(&m, &x, &half_delta_sq_jet(6, 0, 1.0, &x)).unwrap();
    let (de, ae) = (dj.a.eigenvalues().0, aj.a.eigenvalues().0);
    for k in 0..6 {
        assert!((de[k] - ae[k]).abs() <= 1e-3, "{de:?} vs {ae:?}");
    }
}

#[test]
fn subharmonicity_tests() {
    let g = Grid::new(&[-1.0, -1.0], &[1.0, 1.0], &[21, 21], None).unwrap();
    let e = MetricChart::euclidean(2).unwrap();
    let p = pq(2, 1).unwrap();
    let up = GridFunction::from_fn(&g, |x| x[0] * x[0] + x[1] * x[1]);
    let r = f_subharmonic_test(&up, &g, &p, &e, 1e-9).unwrap();
    assert!(r.pass && (r.min_margin - 2.0).abs() < 1e-10);
    let r = f_subharmonic_test(&up.map(|v| -v), &g, &p, &e, 1e-9).unwrap();
    assert!(!r.pass);
    let w = r.witness.unwrap();
    assert!((w.margin + 2.0).abs() < 1e-10);
    assert_eq!(g.kind(w.node), NodeKind::Interior);
}

#[test]
fn tube_potential_is_branch_subharmonic() {
    let f = TubePairFields::new(0.5).unwrap();
    let m = builtin_metric("s3xs3_tube").unwrap();
    let lo = [0.2, 0.0, 0.0, 0.3, 0.0, 0.0];
    let hi = [0.8, 2.0, 2.0, 0.7, 2.0, 2.0];
    let g = Grid::new(&lo, &hi, &[5, 3, 3, 5, 3, 3], None).unwrap();
    let u1 = GridFunction::from_fn(&g, |x| f.u1(x));
    // λ₃ ≥ 0 in six dimensions: at least four eigenvalues nonnegative
    let r = f_subharmonic_test(&u1, &g, &pq(6, 3).unwrap(), &m, 1e-6).unwrap();
    assert!(r.pass, "{r:?}");
    let r = f_subharmonic_test(&u1, &g, &pq(6, 2).unwrap(), &m, 1e-6).unwrap();
    assert!(!r.pass);
}

fn solve(f: &subeq::subeq::Subequation, g: &Grid, phi: &GridFunction) -> (GridFunction, SolveReport) {
    let cfg = SolveConfig { relaxation: 1.8, ..SolveConfig::default() };
    perron_solve(f, &MetricChart::euclidean(g.dim()).unwrap(), g, phi, &cfg).unwrap()
}

#[test]
fn solver_reproduces_harmonic_quadratics() {
    let g = Grid::unit_cube(2, 33).unwrap();
    let phi = GridFunction::from_fn(&g, |x| x[0] * x[0] - x[1] * x[1]);
    for f in [laplace(2).unwrap(), special_lagrangian(2, 0.0).unwrap()] {
        let (u, r) = solve(&f, &g, &phi);
        assert!(r.converged && r.max_margin_residual <= 1e-8, "{r:?}");
        assert!(max_err(&u, &phi) <= 1e-8, "{}: {}", f.name(), max_err(&u, &phi));
        for b in g.boundary_nodes() {
            assert_eq!(u.values[b], phi.values[b]);
        }
        let (res, _) = margin_residual(&u, &g, &f, &MetricChart::euclidean(2).unwrap()).unwrap();
        assert!((res - r.max_margin_residual).abs() <= 1e-12);
    }
}

#[test]
fn one_dimensional_convex_solve_is_affine() {
    let g = Grid::unit_cube(1, 11).unwrap();
    let phi = GridFunction::from_fn(&g, |x| x[0]);
    let (u, r) = solve(&pq(1, 1).unwrap(), &g, &phi);
    assert!(r.converged);
    assert!(max_err(&u, &phi) <= 1e-10, "{:?}", u.values);
}

#[test]
fn solver_errors() {
    let g = Grid::unit_cube(2, 9).unwrap();
    let phi = GridFunction::from_fn(&g, |x| x[0]);
    let e = MetricChart::euclidean(2).unwrap();
    assert!(matches!(perron_solve(&eikonal(2).unwrap(), &e, &g, &phi, &SolveConfig::default()), Err(Error::FlatUpdate { .. })));
    let cfg = SolveConfig { max_sweeps: 2, ..SolveConfig::default() };
    let phi = GridFunction::from_fn(&g, |x| x[0] * x[0] - x[1] * x[1]);
    match perron_solve(&laplace(2).unwrap(), &e, &g, &phi, &cfg) {
        Err(Error::NonConvergence(b)) => {
            assert_eq!(b.1.sweeps, 2);
            assert!(!b.1.converged);
        }
        other => panic!("expected non-convergence, got {:?}", other.map(|r| r.1)),
    }
}

#[test]
fn zero_maximum_principle() {
    let g = Grid::new(&[-1.2, -1.2], &[1.2, 1.2], &[25, 25], Some(&DomainSpec::ball(vec![0.0, 0.0], 1.0))).unwrap();
    let r = zmp_check(&GridFunction::constant(&g, -1.0), g.kinds()).unwrap();
    assert_eq!(r.verdict, ZmpVerdict::Pass);
    let w = GridFunction::from_fn(&g, |x| 1.0 - x[0] * x[0] - x[1] * x[1]);
    let r = zmp_check(&w, g.kinds()).unwrap();
    assert_eq!(r.verdict, ZmpVerdict::Violation);
    assert!((r.magnitude - 1.0).abs() < 1e-12);
    assert!(r.boundary_max <= 1e-12, "{}", r.boundary_max);
    let r = zmp_check(&GridFunction::constant(&g, 1.0), g.kinds()).unwrap();
    assert_eq!(r.verdict, ZmpVerdict::NotApplicable);
}

#[test]
fn comparison_for_a_linear_equation() {
    let g = Grid::unit_cube(2, 17).unwrap();
    let e = MetricChart::euclidean(2).unwrap();
    let u = GridFunction::from_fn(&g, |x| x[0] * x[1] + 0.3 * x[0]);
    let v = u.map(|t| -t);
    let r = comparison_check(&u, &v, &laplace(2).unwrap(), &e, &g, 1e-9).unwrap();
    assert!(r.u_subharmonic.pass && r.v_dual_subharmonic.pass);
    assert_eq!(r.zmp.verdict, ZmpVerdict::Pass);
    assert!(!r.comparison_fails());
}

#[test]
fn root_gradient_profile_and_comparison() {
    let big_r = 1.0;
    let mut rng = random::rng(51);
    for _ in 0..1000 {
        let x: Vec<f64> = random::unit_vector(3, &mut rng).iter().map(|v| v * rand_unit(&mut rng) * big_r).collect();
        let j = cubic_profile_jet(big_r, &x);
        assert!((&j.a + &root_gradient_shift(&j.p)).frobenius() <= 1e-12);
    }
    let f = root_gradient(2, -1.0, false).unwrap();
    let ball = DomainSpec::ball(vec![0.0, 0.0], big_r);
    let g = Grid::new(&[-1.1, -1.1], &[1.1, 1.1], &[23, 23], Some(&ball)).unwrap();
    let e = MetricChart::euclidean(2).unwrap();
    let u = GridFunction::constant(&g, 0.0);
    for c in [0.0, 0.01, 0.1] {
        let v = GridFunction::from_fn(&g, |x| -cubic_profile_jet(big_r, x).r - c);
        let r = comparison_check(&u, &v, &f, &e, &g, 1e-6).unwrap();
        assert!(r.u_subharmonic.pass && r.v_dual_subharmonic.pass, "{r:?}");
        assert_ne!(r.zmp.verdict, ZmpVerdict::Violation);
    }
    // V itself is not dual-subharmonic: its jets sit where the exact dual margin is 0
    // but the positive shift turns A + s into 2s for −V only
    let jv = cubic_profile_jet(big_r, &[0.3, 0.4]);
    assert!(dual(&f).margin(&[0.3, 0.4], &jv).abs() < 1e-12);
}

fn rand_unit(rng: &mut random::Rng64) -> f64 {
    use rand::Rng;
    rng.random::<f64>()
}

#[test]
fn sums_probe_on_a_bump() {
    let g = Grid::new(&[-1.0], &[1.0], &[41], None).unwrap();
    let u = GridFunction::from_fn(&g, |x| 1.0 - x[0] * x[0]);
    let v = GridFunction::constant(&g, 0.0);
    let r = sums_probe(&u, &v, &g, &[1.0, 0.1, 0.01, 0.001]).unwrap();
    assert!(r.applicable && r.monotone && r.penalty_trend);
    for rec in &r.records {
        assert!(rec.x[0].abs() < 1e-12 && rec.y[0].abs() < 1e-12);
        assert!((rec.m_eps - 1.0).abs() < 1e-12);
    }
    let r = sums_probe(&v, &v.map(|t| t - 0.5), &g, &[1.0]).unwrap();
    assert!(!r.applicable && r.records.is_empty());
}

#[test]
fn tube_counterexample() {
    let r = tube_counterexample_harness(0.5, &TubeHarnessOptions::default()).unwrap();
    assert_eq!(r.signature_matches, 100);
    assert!(r.lambda4_residual_u1 <= 1e-6 && r.lambda4_residual_pair <= 1e-6);
    assert_eq!(r.zmp.verdict, ZmpVerdict::Violation);
    assert!((r.zmp.magnitude - 0.5).abs() <= 2e-2);
    assert!(r.boundary_gap <= 4.0 * f64::EPSILON);
    assert!((r.interior_gap - 0.5).abs() <= 1e-3);
    assert!(r.min_margin_u >= -1e-12 && r.min_margin_v_dual >= -1e-12);
    let s = r.sums.unwrap();
    assert!(s.applicable && s.monotone);
    assert!(s.records.iter().all(|rec| rec.m_eps >= s.m0 - 1e-12));
    assert!(tube_counterexample_harness(PI * PI / 8.0, &TubeHarnessOptions::default()).is_err());
    let coarse = TubeHarnessOptions { h: 0.5, ..TubeHarnessOptions::default() };
    assert!(matches!(tube_counterexample_harness(0.5, &coarse), Err(Error::Grid(_))));
}

#[test]
fn csv_round_trip() {
    let g = Grid::new(&[-1.0, 0.5], &[1.0, 2.0], &[5, 4], None).unwrap();
    let u = GridFunction::from_fn(&g, |x| (x[0] * 3.7).sin() / (1.0 + x[1]));
    let text = u.to_csv();
    assert!(text.starts_with("dims,h,origin\n5 4,"));
    let back = GridFunction::from_csv(&text).unwrap();
    assert_eq!(back, u);
    assert!(GridFunction::from_csv("dims,h,origin\n2,1,0\n1\n").is_err());
}
