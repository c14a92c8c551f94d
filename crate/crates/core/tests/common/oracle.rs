//! Independent reference computations. Nothing here calls into the library's
//! linear algebra; matrices are plain nested vectors.

#![allow(dead_code)]

pub type Mat = Vec<Vec<f64>>;

pub fn to_mat(a: &subeq::jet::SymMat) -> Mat {
    let n = a.dim();
    (0..n).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect()
}

pub fn diag(d: &[f64]) -> Mat {
    let n = d.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub fn trace(a: &Mat) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// Cyclic Jacobi rotations; eigenvalues ascending.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Faddeev–LeVerrier: `σ₁, …, σₙ` from traces of matrix powers.
pub fn sigma_leverrier(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![1.0];
    let mut m = diag(&vec![0.0; n]);
    for k in 1..=n {
        // M_k = A M_{k−1} + c_{k−1} I, c_k = −tr(A M_k)/k
        let mut mk = matmul(a, &m);
        for i in 0..n {
            mk[i][i] += c[k - 1];
        }
        let ck = -trace(&matmul(a, &mk)) / k as f64;
        c.push(ck);
        m = mk;
    }
    // det(tI − A) = Σ c_k t^{n−k}; σ_k = (−1)^k c_k
    (1..=n).map(|k| if k % 2 == 0 { c[k] } else { -c[k] }).collect()
}

pub fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Complex number, just enough for Durand–Kerner.
#[derive(Clone, Copy, Debug)]
pub struct C(pub f64, pub f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: C) -> C {
        let d = o.0 * o.0 + o.1 * o.1;
        C((self.0 * o.0 + self.1 * o.1) / d, (self.1 * o.0 - self.0 * o.1) / d)
    }
}

/// Roots of a real polynomial (highest degree first) by Durand–Kerner.
pub fn poly_roots(coeffs: &[f64]) -> Vec<C> {
    let k = coeffs.len() - 1;
    let lead = coeffs[0];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: C| monic.iter().fold(C(0.0, 0.0), |acc, &c| acc.mul(z).add(C(c, 0.0)));
    let bound = 1.0 + monic[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<C> = (0..k)
        .map(|i| {
            let ang = 2.0 * std::f64::consts::PI * i as f64 / k as f64 + 0.4;
            C(bound * ang.cos(), bound * ang.sin())
        })
        .collect();
    for _ in 0..5000 {
        let mut delta = 0.0f64;
        for i in 0..k {
            let mut den = C(1.0, 0.0);
            for j in 0..k {
                if j != i {
                    den = den.mul(z[i].sub(z[j]));
                }
            }
            let step = eval(z[i]).div(den);
            z[i] = z[i].sub(step);
            delta = delta.max((step.0 * step.0 + step.1 * step.1).sqrt());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    z
}

/// σ_k-Gårding eigenvalues from the oracle σ's: negated real parts of the
/// roots of `Σ_j C(n−j, k−j) σ_j s^{k−j}`, ascending; also the largest
/// imaginary part seen.
pub fn garding_oracle(a: &Mat, k: usize) -> (Vec<f64>, f64) {
    let n = a.len();
    let sig = sigma_leverrier(a);
    let coeffs: Vec<f64> = (0..=k).map(|j| binom(n - j, k - j) * if j == 0 { 1.0 } else { sig[j - 1] }).collect();
    let roots = poly_roots(&coeffs);
    let imag = roots.iter().fold(0.0f64, |m, z| m.max(z.1.abs()));
    let mut g: Vec<f64> = roots.iter().map(|z| -z.0).collect();
    g.sort_by(f64::total_cmp);
    (g, imag)
}

/// All `p`-fold sums of `ev`, ascending.
pub fn pfold_oracle(ev: &[f64], p: usize) -> Vec<f64> {
    fn rec(ev: &[f64], p: usize, start: usize, acc: f64, out: &mut Vec<f64>) {
        if p == 0 {
            out.push(acc);
            return;
        }
        for i in start..ev.len() {
            rec(ev, p - 1, i + 1, acc + ev[i], out);
        }
    }
    let mut out = Vec::new();
    rec(ev, p, 0, 0.0, &mut out);
    out.sort_by(f64::total_cmp);
    out
}

/// Embedding of tube coordinates `(δ, θ, φ)` into the unit sphere `S³ ⊂ R⁴`.
pub fn s3_embed(x: &[f64]) -> [f64; 4] {
    let (d, t, f) = (x[0], x[1], x[2]);
    [d.cos() * t.cos(), d.cos() * t.sin(), d.sin() * f.cos(), d.sin() * f.sin()]
}

/// Eigenvalues of the riemannian hessian of `½δ²` on `S³` at the point with
/// tube coordinates `x`, where `δ` is the distance to the circle
/// `{x₃ = x₄ = 0}`. Computed in `R⁴` from the degree-zero extension
/// `F(y) = ½ atan2(|y₃₄|, |y₁₂|)²` (so `⟨∇F, y⟩ = 0` and the sphere hessian
/// is the ambient hessian restricted to the tangent space), by centered
/// differences with step `h`.
pub fn s3_half_delta_sq_hessian(x: &[f64], h: f64) -> Vec<f64> {
    let f = |y: [f64; 4]| {
        let a = (y[0] * y[0] + y[1] * y[1]).sqrt();
        let b = (y[2] * y[2] + y[3] * y[3]).sqrt();
        0.5 * b.atan2(a).powi(2)
    };
    let y = s3_embed(x);
    let shift = |v: [f64; 4], i: usize, s: f64| {
        let mut w = v;
        w[i] += s;
        w
    };
    let mut hess = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            hess[i][j] = if i == j {
                (f(shift(y, i, h)) - 2.0 * f(y) + f(shift(y, i, -h))) / (h * h)
            } else {
                (f(shift(shift(y, i, h), j, h)) - f(shift(shift(y, i, h), j, -h)) - f(shift(shift(y, i, -h), j, h))
                    + f(shift(shift(y, i, -h), j, -h)))
                    / (4.0 * h * h)
            };
        }
    }
    let (d, t, ph) = (x[0], x[1], x[2]);
    // orthonormal tangent frame: ∂_δ, ∂_θ / cos δ, ∂_φ / sin δ
    let e = [
        [-d.sin() * t.cos(), -d.sin() * t.sin(), d.cos() * ph.cos(), d.cos() * ph.sin()],
        [-t.sin(), t.cos(), 0.0, 0.0],
        [0.0, 0.0, -ph.sin(), ph.cos()],
    ];
    let restricted: Mat =
        (0..3).map(|a| (0..3).map(|b| (0..4).map(|i| (0..4).map(|j| e[a][i] * hess[i][j] * e[b][j]).sum::<f64>()).sum()).collect()).collect();
    jacobi_eigenvalues(&restricted)
}

/// Hessian of the signed distance `|x| − R` at a point of the sphere `|x| = R`:
/// `(I − x̂ x̂ᵗ)/R`, restricted to the tangent space gives `I/R`.
pub fn sphere_distance_hessian(x: &[f64]) -> Mat {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n = x.len();
    (0..n).map(|i| (0..n).map(|j| ((if i == j { 1.0 } else { 0.0 }) - x[i] * x[j] / (r * r)) / r).collect()).collect()
}

/// Exhaustive net over Lagrangian 2-planes of `C²` for diagonal
/// `A = diag(a₁, b₁, a₂, b₂)` in interleaved coordinates `(x₁, y₁, x₂, y₂)`.
/// Planes are `O(θ) diag(e^{iφ₁}, e^{iφ₂}) R²`; the trace is
/// `Σ_k Σ_j O_{jk}² (a_j cos²φ_k + b_j sin²φ_k)`.
pub fn lagrangian_net_min(a: [f64; 2], b: [f64; 2], step: f64) -> f64 {
    let m = (std::f64::consts::PI / step).ceil() as usize;
    let ang = |i: usize| i as f64 * std::f64::consts::PI / m as f64;
    // per column k and rotation weight w = O_{1k}², the value is
    // w (a₁c² + b₁s²) + (1 − w)(a₂c² + b₂s²); precompute over φ
    let mut best = f64::INFINITY;
    for it in 0..m {
        let th = ang(it);
        let w0 = th.cos().powi(2);
        let w1 = 1.0 - w0;
        let col = |w: f64, phi: f64| {
            let (c2, s2) = (phi.cos().powi(2), phi.sin().powi(2));
            w * (a[0] * c2 + b[0] * s2) + (1.0 - w) * (a[1] * c2 + b[1] * s2)
        };
        let m0 = (0..m).map(|i| col(w0, ang(i))).fold(f64::INFINITY, f64::min);
        let m1 = (0..m).map(|i| col(w1, ang(i))).fold(f64::INFINITY, f64::min);
        best = best.min(m0 + m1);
    }
    best
}
