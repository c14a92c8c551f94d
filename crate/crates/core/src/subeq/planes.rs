//! Numerical minimization of `tr_ξ A` over families of planes: the full
//! Grassmannian, Lagrangian planes in `Cⁿ`, and associative 3-planes in `R⁷`.

use nalgebra::{DMatrix, DVector};

use crate::jet::random::{self, Rng64};
use crate::jet::{trace_on_basis, ComplexStructure, SymMat};

fn orthonormalize(w: DMatrix<f64>) -> DMatrix<f64> {
    let p = w.ncols();
    w.qr().q().columns(0, p).into_owned()
}

/// Uniform random `p`-plane in `Rⁿ` as an orthonormal `n × p` basis.
pub fn random_plane(n: usize, p: usize, rng: &mut Rng64) -> DMatrix<f64> {
    orthonormalize(DMatrix::from_fn(n, p, |_, _| random::normal(rng)))
}

fn spectral_radius(a: &SymMat) -> f64 {
    let ev = a.eigenvalues();
    ev.0[0].abs().max(ev.0[ev.len() - 1].abs()).max(1e-12)
}

/// Projected gradient descent on the Stiefel manifold, QR retraction.
pub fn refine_grassmann(a: &SymMat, w: &DMatrix<f64>, iters: usize) -> (f64, DMatrix<f64>) {
    let n = a.dim();
    let step = 0.45 / spectral_radius(a);
    let m = a.as_matrix();
    let mut w = w.clone();
    let mut f = trace_on_basis(a, &w);
    for _ in 0..iters {
        let aw = m * &w;
        let g = (DMatrix::identity(n, n) - &w * w.transpose()) * aw * 2.0;
        if g.norm() < 1e-11 {
            break;
        }
        let cand = orthonormalize(&w - g * step);
        let fc = trace_on_basis(a, &cand);
        if fc > f {
            break;
        }
        w = cand;
        f = fc;
    }
    (f, w)
}

/// Minimum of `tr_ξ A` over `samples` random `p`-planes, with the best
/// sample refined by descent.
pub fn grassmann_min_sampled(a: &SymMat, p: usize, samples: usize, rng: &mut Rng64) -> f64 {
    let n = a.dim();
    let mut best = (f64::INFINITY, DMatrix::zeros(n, p));
    for _ in 0..samples.max(1) {
        let w = random_plane(n, p, rng);
        let f = trace_on_basis(a, &w);
        if f < best.0 {
            best = (f, w);
        }
    }
    let (f, _) = refine_grassmann(a, &best.1, 4000);
    f.min(best.0)
}

/// Real `2n × 2n` form of a skew-hermitian generator: the part of `m`
/// that is skew and commutes with `J`.
fn project_unitary_algebra(m: &DMatrix<f64>, j: &DMatrix<f64>) -> DMatrix<f64> {
    let s = (m - m.transpose()) * 0.5;
    (&s - j * &s * j) * 0.5
}

fn cayley(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let lhs = &id - x * 0.5;
    let rhs = &id + x * 0.5;
    lhs.lu().solve(&rhs).expect("Cayley transform of a skew matrix is regular")
}

fn lagrangian_columns(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows() / 2;
    DMatrix::from_fn(2 * n, n, |r, c| q[(r, 2 * c)])
}

/// `min tr_ξ A` over Lagrangian `n`-planes of `Cⁿ` (interleaved coordinates),
/// by multi-start descent over `U(n)` acting on `Rⁿ`. Returns an upper bound
/// of the true minimum.
pub fn lagrangian_min(a: &SymMat, starts: usize, seed: u64) -> f64 {
    let dim = a.dim();
    let n = dim / 2;
    let j = ComplexStructure::standard(n).matrix().clone();
    let m = a.as_matrix();
    let rho = spectral_radius(a);
    let mut rng = random::rng(seed);
    let mut best = f64::INFINITY;
    for s in 0..starts.max(1) {
        let mut q = if s == 0 {
            DMatrix::identity(dim, dim)
        } else {
            let g = DMatrix::from_fn(dim, dim, |_, _| random::normal(&mut rng) * 1.5);
            cayley(&project_unitary_algebra(&g, &j))
        };
        let mut f = trace_on_basis(a, &lagrangian_columns(&q));
        let mut alpha = 1.0 / rho;
        for _ in 0..400 {
            // Euclidean gradient 2 A Q E Eᵗ pulled back to the Lie algebra
            let mut g = m * &q * 2.0;
            for c in 0..n {
                g.column_mut(2 * c + 1).fill(0.0);
            }
            let omega = project_unitary_algebra(&(q.transpose() * g), &j);
            let gn2 = omega.norm_squared();
            if gn2.sqrt() < 1e-9 {
                break;
            }
            let mut accepted = false;
            for _ in 0..30 {
                let cand = &q * cayley(&(&omega * -alpha));
                let fc = trace_on_basis(a, &lagrangian_columns(&cand));
                if fc <= f - 1e-4 * alpha * gn2 {
                    q = cand;
                    f = fc;
                    alpha *= 2.0;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        best = best.min(f);
    }
    best
}

/// Cross product on `R⁷ = Im O` from the octonion triples `(i, i+1, i+3) mod 7`.
pub fn cross7(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut z = DVector::zeros(7);
    for i in 0..7 {
        let (a, b, c) = (i, (i + 1) % 7, (i + 3) % 7);
        // e_a × e_b = e_c, e_b × e_c = e_a, e_c × e_a = e_b
        z[c] += x[a] * y[b] - x[b] * y[a];
        z[a] += x[b] * y[c] - x[c] * y[b];
        z[b] += x[c] * y[a] - x[a] * y[c];
    }
    z
}

/// Associative 3-form `φ(x, y, z) = ⟨x × y, z⟩`.
pub fn associative_form(x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
    cross7(x, y).dot(z)
}

fn assoc_value(a: &SymMat, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let z = cross7(x, y);
    a.quad(x) + a.quad(y) + a.quad(&z)
}

fn gram_schmidt_pair(x: &DVector<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
    let xn = x.norm();
    if xn < 1e-12 {
        return None;
    }
    let x = x / xn;
    let y = y - &x * x.dot(y);
    let yn = y.norm();
    if yn < 1e-12 {
        return None;
    }
    Some((x, y / yn))
}

/// `min tr_ξ A` over associative planes `span{x, y, x × y}`: `samples` random
/// frames, the best eight refined by projected descent.
pub fn associative_min(a: &SymMat, samples: usize, seed: u64) -> f64 {
    assert_eq!(a.dim(), 7, "associative planes live in R^7");
    let mut rng = random::rng(seed);
    let mut pool: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::with_capacity(samples);
    for _ in 0..samples.max(1) {
        let x = random::unit_vector(7, &mut rng);
        let y = random::gaussian_vector(7, &mut rng);
        if let Some((x, y)) = gram_schmidt_pair(&x, &y) {
            pool.push((assoc_value(a, &x, &y), x, y));
        }
    }
    pool.sort_by(|p, q| p.0.total_cmp(&q.0));
    let m = a.as_matrix();
    let rho = spectral_radius(a);
    let mut best = pool.first().map_or(f64::INFINITY, |p| p.0);
    for (f0, x0, y0) in pool.into_iter().take(8) {
        let (mut f, mut x, mut y) = (f0, x0, y0);
        let mut alpha = 0.25 / rho;
        for _ in 0..500 {
            let z = cross7(&x, &y);
            let az = m * &z;
            // d/dx ⟨A(x×y), x×y⟩ = 2 (∂(x×y)/∂x)ᵗ A z, with ∂(x×y)/∂x · v = v × y
            let gz_x = DVector::from_fn(7, |i, _| {
                let mut e = DVector::zeros(7);
                e[i] = 1.0;
                2.0 * cross7(&e, &y).dot(&az)
            });
            let gz_y = DVector::from_fn(7, |i, _| {
                let mut e = DVector::zeros(7);
                e[i] = 1.0;
                2.0 * cross7(&x, &e).dot(&az)
            });
            let gx = m * &x * 2.0 + gz_x;
            let gy = m * &y * 2.0 + gz_y;
            // tangent components
            let gx = &gx - &x * x.dot(&gx) - &y * y.dot(&gx);
            let gy = &gy - &x * x.dot(&gy) - &y * y.dot(&gy);
            let gn2 = gx.norm_squared() + gy.norm_squared();
            if gn2.sqrt() < 1e-10 {
                break;
            }
            let mut accepted = false;
            for _ in 0..30 {
                if let Some((xc, yc)) = gram_schmidt_pair(&(&x - &gx * alpha), &(&y - &gy * alpha)) {
                    let fc = assoc_value(a, &xc, &yc);
                    if fc <= f - 1e-4 * alpha * gn2 {
                        x = xc;
                        y = yc;
                        f = fc;
                        alpha *= 2.0;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        best = best.min(f);
    }
    best
}

/// Random associative frame `(x, y, x × y)` as a `7 × 3` matrix.
pub fn random_associative_frame(rng: &mut Rng64) -> DMatrix<f64> {
    loop {
        let x = random::unit_vector(7, rng);
        let y = random::gaussian_vector(7, rng);
        if let Some((x, y)) = gram_schmidt_pair(&x, &y) {
            let z = cross7(&x, &y);
            return DMatrix::from_columns(&[x, y, z]);
        }
    }
}

/// Random Lagrangian plane basis (`2n × n`).
pub fn random_lagrangian_plane(n: usize, rng: &mut Rng64) -> DMatrix<f64> {
    let j = ComplexStructure::standard(n).matrix().clone();
    let g = DMatrix::from_fn(2 * n, 2 * n, |_, _| random::normal(rng) * 1.5);
    lagrangian_columns(&cayley(&project_unitary_algebra(&g, &j)))
}
