//! Symmetric matrices, 2-jets and the spectral functions built on them.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest supported fiber dimension.
pub const MAX_DIM: usize = 16;

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::Dimension(n))
    }
}

/// A real symmetric `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat(DMatrix<f64>);

impl SymMat {
    /// Validates symmetry (scaled tolerance `1e-12 · max(1, max|A_ij|)`) and
    /// stores the exactly symmetrized matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        check_dim(m.nrows())?;
        let scale = m.amax().max(1.0);
        let mut asym: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..i {
                asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if asym > 1e-12 * scale || !asym.is_finite() {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self::symmetrize(m))
    }

    /// Symmetric part `½(M + Mᵗ)` of a square matrix; never fails.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "square matrix required");
        let s = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        SymMat(s)
    }

    pub fn zeros(n: usize) -> Self {
        SymMat(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMat(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMat(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    /// Builds from the lower triangle of `f(i, j)` (`i ≥ j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMat(m)
    }

    /// `v vᵗ`.
    pub fn outer(v: &DVector<f64>) -> Self {
        SymMat(v * v.transpose())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Frobenius inner product `⟨A, B⟩ = tr(AB)`.
    pub fn inner(&self, other: &SymMat) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// `⟨A v, v⟩`.
    pub fn quad(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.0 * v))
    }

    /// Congruence `h A hᵗ` for any square `h` of matching size.
    pub fn congruence(&self, h: &DMatrix<f64>) -> SymMat {
        SymMat::symmetrize(h * &self.0 * h.transpose())
    }

    /// Restriction `Wᵗ A W` to the column span of `w` (`n × p`).
    pub fn restrict(&self, w: &DMatrix<f64>) -> SymMat {
        SymMat::symmetrize(w.transpose() * &self.0 * w)
    }

    pub fn add_identity(&self, t: f64) -> SymMat {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += t;
        }
        SymMat(m)
    }

    pub fn scale(&self, t: f64) -> SymMat {
        SymMat(&self.0 * t)
    }

    pub fn eigenvalues(&self) -> EigenList {
        ordered_eigenvalues(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().0.last().unwrap()
    }

    /// Ascending eigenvalues with an orthonormal eigenvector matrix (columns).
    pub fn eigen(&self) -> (EigenList, DMatrix<f64>) {
        let n = self.dim();
        let se = nalgebra::SymmetricEigen::new(self.0.clone());
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, idx[c])]);
        (EigenList(vals), vecs)
    }

    /// Symmetric square root and inverse square root of a positive definite matrix.
    pub fn sqrt_and_inv_sqrt(&self) -> Result<(SymMat, SymMat)> {
        let (ev, v) = self.eigen();
        if ev.0[0] <= 0.0 {
            return Err(Error::Singular("positive definite square root"));
        }
        let d: Vec<f64> = ev.0.iter().map(|x| x.sqrt()).collect();
        let s = &v * DMatrix::from_diagonal(&DVector::from_vec(d.clone())) * v.transpose();
        let di: Vec<f64> = d.iter().map(|x| 1.0 / x).collect();
        let si = &v * DMatrix::from_diagonal(&DVector::from_vec(di)) * v.transpose();
        Ok((SymMat::symmetrize(s), SymMat::symmetrize(si)))
    }
}

impl Add for &SymMat {
    type Output = SymMat;
    fn add(self, rhs: &SymMat) -> SymMat {
        SymMat(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMat {
    type Output = SymMat;
    fn sub(self, rhs: &SymMat) -> SymMat {
        SymMat(&self.0 - &rhs.0)
    }
}

impl Neg for &SymMat {
    type Output = SymMat;
    fn neg(self) -> SymMat {
        SymMat(-&self.0)
    }
}

impl Mul<f64> for &SymMat {
    type Output = SymMat;
    fn mul(self, t: f64) -> SymMat {
        self.scale(t)
    }
}

/// Eigenvalues in nondecreasing order, multiplicities repeated.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenList(pub Vec<f64>);

impl EigenList {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `λ_k`, 1-based.
    pub fn lambda(&self, k: usize) -> f64 {
        assert!(k >= 1 && k <= self.0.len(), "eigenvalue index {k} out of range");
        self.0[k - 1]
    }
}

/// Exact spectrum of a symmetric matrix, sorted ascending.
pub fn ordered_eigenvalues(a: &SymMat) -> EigenList {
    let m = &a.0;
    let n = m.nrows();
    let mut v = match n {
        1 => vec![m[(0, 0)]],
        2 => {
            let (p, q, r) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let mean = 0.5 * (p + r);
            let d = (0.5 * (p - r)).hypot(q);
            vec![mean - d, mean + d]
        }
        _ => nalgebra::SymmetricEigen::new(m.clone()).eigenvalues.as_slice().to_vec(),
    };
    v.sort_by(f64::total_cmp);
    EigenList(v)
}

/// Validating entry point: rejects non-symmetric input.
pub fn ordered_eigenvalues_of(m: &DMatrix<f64>) -> Result<EigenList> {
    Ok(ordered_eigenvalues(&SymMat::new(m.clone())?))
}

/// A 2-jet `(r, p, A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub r: f64,
    pub p: DVector<f64>,
    pub a: SymMat,
}

impl Jet2 {
    pub fn new(r: f64, p: DVector<f64>, a: SymMat) -> Result<Self> {
        if p.len() != a.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: p.len() });
        }
        Ok(Jet2 { r, p, a })
    }

    pub fn zero(n: usize) -> Self {
        Jet2 { r: 0.0, p: DVector::zeros(n), a: SymMat::zeros(n) }
    }

    /// `(0, 0, A)`.
    pub fn pure(a: SymMat) -> Self {
        let n = a.dim();
        Jet2 { r: 0.0, p: DVector::zeros(n), a }
    }

    pub fn from_parts(r: f64, p: &[f64], a: SymMat) -> Self {
        assert_eq!(p.len(), a.dim());
        Jet2 { r, p: DVector::from_column_slice(p), a }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn norm_squared(&self) -> f64 {
        self.r * self.r + self.p.norm_squared() + self.a.0.norm_squared()
    }

    /// Flat product norm `√(r² + |p|² + ‖A‖²_F)`.
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn inner(&self, other: &Jet2) -> f64 {
        self.r * other.r + self.p.dot(&other.p) + self.a.inner(&other.a)
    }

    pub fn scale(&self, t: f64) -> Jet2 {
        Jet2 { r: self.r * t, p: &self.p * t, a: self.a.scale(t) }
    }

    /// `self + t · other`.
    pub fn axpy(&self, t: f64, other: &Jet2) -> Jet2 {
        Jet2 { r: self.r + t * other.r, p: &self.p + &other.p * t, a: SymMat(&self.a.0 + &other.a.0 * t) }
    }

    pub fn with_r(&self, r: f64) -> Jet2 {
        Jet2 { r, p: self.p.clone(), a: self.a.clone() }
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

/// Distance in the fiber for the flat product norm.
pub fn jet_distance(j1: &Jet2, j2: &Jet2) -> f64 {
    (j1 - j2).norm()
}

/// Orthogonal `J` on `R^{2m}` with `J² = −I`.
#[derive(Clone, Debug)]
pub struct ComplexStructure {
    j: DMatrix<f64>,
}

fn orthogonal_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (m.transpose() * m - DMatrix::identity(n, n)).amax()
}

impl ComplexStructure {
    pub fn new(j: DMatrix<f64>) -> Result<Self> {
        let n = j.nrows();
        if n != j.ncols() || n % 2 != 0 {
            return Err(Error::Structure(format!("complex structure needs an even square matrix, got {}x{}", n, j.ncols())));
        }
        let sq = (&j * &j + DMatrix::identity(n, n)).amax();
        if sq > 1e-12 || orthogonal_residual(&j) > 1e-12 {
            return Err(Error::Structure("J is not an orthogonal square root of -I".into()));
        }
        Ok(ComplexStructure { j })
    }

    /// Coordinates `(x₁, y₁, x₂, y₂, …)` with `J e_{x_k} = e_{y_k}`.
    pub fn standard(m: usize) -> Self {
        let mut j = DMatrix::zeros(2 * m, 2 * m);
        for k in 0..m {
            j[(2 * k + 1, 2 * k)] = 1.0;
            j[(2 * k, 2 * k + 1)] = -1.0;
        }
        ComplexStructure { j }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn real_dim(&self) -> usize {
        self.j.nrows()
    }
}

/// Orthogonal `I, J, K` on `R^{4m}` with the quaternion relations.
#[derive(Clone, Debug)]
pub struct QuaternionicStructure {
    i: DMatrix<f64>,
    j: DMatrix<f64>,
    k: DMatrix<f64>,
}

impl QuaternionicStructure {
    pub fn new(i: DMatrix<f64>, j: DMatrix<f64>, k: DMatrix<f64>) -> Result<Self> {
        let n = i.nrows();
        if n % 4 != 0 || [&i, &j, &k].iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::Structure("quaternionic structure needs 4m x 4m matrices".into()));
        }
        let id = DMatrix::<f64>::identity(n, n);
        let mut worst: f64 = 0.0;
        for m in [&i, &j, &k] {
            worst = worst.max((m * m + &id).amax()).max(orthogonal_residual(m));
        }
        worst = worst.max((&i * &j - &k).amax()).max((&j * &k - &i).amax()).max((&k * &i - &j).amax());
        if worst > 1e-12 {
            return Err(Error::Structure(format!("quaternion relations fail by {worst:e}")));
        }
        Ok(QuaternionicStructure { i, j, k })
    }

    /// Left multiplication by `i, j, k` on `Hᵐ` with coordinates `(a, b, c, d)` per slot.
    pub fn standard(m: usize) -> Self {
        let n = 4 * m;
        let (mut i, mut j, mut k) = (DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n));
        let bi = [[0., -1., 0., 0.], [1., 0., 0., 0.], [0., 0., 0., -1.], [0., 0., 1., 0.]];
        let bj = [[0., 0., -1., 0.], [0., 0., 0., 1.], [1., 0., 0., 0.], [0., -1., 0., 0.]];
        let bk = [[0., 0., 0., -1.], [0., 0., -1., 0.], [0., 1., 0., 0.], [1., 0., 0., 0.]];
        for s in 0..m {
            for r in 0..4 {
                for c in 0..4 {
                    i[(4 * s + r, 4 * s + c)] = bi[r][c];
                    j[(4 * s + r, 4 * s + c)] = bj[r][c];
                    k[(4 * s + r, 4 * s + c)] = bk[r][c];
                }
            }
        }
        QuaternionicStructure { i, j, k }
    }

    pub fn matrices(&self) -> [&DMatrix<f64>; 3] {
        [&self.i, &self.j, &self.k]
    }

    pub fn real_dim(&self) -> usize {
        self.i.nrows()
    }
}

/// `½(A − JAJ)`, the part of `A` commuting with `J`.
pub fn hermitian_part_complex(a: &SymMat, c: &ComplexStructure) -> Result<SymMat> {
    if a.dim() != c.real_dim() {
        return Err(Error::DimensionMismatch { expected: c.real_dim(), got: a.dim() });
    }
    let j = &c.j;
    Ok(SymMat::symmetrize((&a.0 - j * &a.0 * j) * 0.5))
}

/// `¼(A − IAI − JAJ − KAK)`.
pub fn hermitian_part_quaternionic(a: &SymMat, q: &QuaternionicStructure) -> Result<SymMat> {
    if a.dim() != q.real_dim() {
        return Err(Error::DimensionMismatch { expected: q.real_dim(), got: a.dim() });
    }
    let mut m = a.0.clone();
    for s in q.matrices() {
        m -= s * &a.0 * s;
    }
    Ok(SymMat::symmetrize(m * 0.25))
}

/// Orthogonal projector onto a `p`-plane together with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct PlaneProjector {
    projector: SymMat,
    basis: DMatrix<f64>,
}

impl PlaneProjector {
    /// Orthonormalizes the columns of `w` (`n × p`, full column rank).
    pub fn from_basis(w: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = w.shape();
        check_dim(n)?;
        if p == 0 || p > n {
            return Err(Error::IndexOutOfRange { index: p, n });
        }
        let qr = w.clone().qr();
        let r = qr.r();
        let scale = w.amax().max(f64::MIN_POSITIVE);
        if (0..p).any(|i| r[(i, i)].abs() <= 1e-12 * scale) {
            return Err(Error::Singular("plane basis"));
        }
        let basis = qr.q().columns(0, p).into_owned();
        let projector = SymMat::symmetrize(&basis * basis.transpose());
        Ok(PlaneProjector { projector, basis })
    }

    /// Validates `P² = P`, `Pᵗ = P`, `tr P = p` to 1e−10.
    pub fn from_projector(p_mat: SymMat) -> Result<Self> {
        let n = p_mat.dim();
        let m = p_mat.as_matrix();
        let idem = (m * m - m).amax();
        let tr = m.trace();
        let p = tr.round();
        if idem > 1e-10 || (tr - p).abs() > 1e-10 || p < 1.0 {
            return Err(Error::Structure(format!("not an orthogonal projector (|P²-P| = {idem:e}, trace {tr})")));
        }
        let (_, v) = p_mat.eigen();
        let p = p as usize;
        let basis = v.columns(n - p, p).into_owned();
        Ok(PlaneProjector { projector: p_mat, basis })
    }

    pub fn projector(&self) -> &SymMat {
        &self.projector
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn plane_dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// `⟨A, P_ξ⟩`.
pub fn trace_on_plane(a: &SymMat, xi: &PlaneProjector) -> Result<f64> {
    if a.dim() != xi.projector.dim() {
        return Err(Error::DimensionMismatch { expected: xi.projector.dim(), got: a.dim() });
    }
    Ok(a.inner(&xi.projector))
}

/// Trace of the restriction `tr(Wᵗ A W)` for an orthonormal basis `W`.
pub fn trace_on_basis(a: &SymMat, w: &DMatrix<f64>) -> f64 {
    let aw = &a.0 * w;
    w.dot(&aw)
}

/// All `C(n, p)` sums `λ_{i₁} + ⋯ + λ_{i_p}`, ascending.
pub fn pfold_eigen_sums(a: &SymMat, p: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    if p == 0 || p > n {
        return Err(Error::IndexOutOfRange { index: p, n });
    }
    let ev = ordered_eigenvalues(a).0;
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..p).collect();
    loop {
        out.push(idx.iter().map(|&i| ev[i]).sum());
        // next combination in lexicographic order
        let mut k = p;
        loop {
            if k == 0 {
                out.sort_by(f64::total_cmp);
                return Ok(out);
            }
            k -= 1;
            if idx[k] < n - p + k {
                idx[k] += 1;
                for m in k + 1..p {
                    idx[m] = idx[m - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `e_0, …, e_m` of `values` (with `e_0 = 1`).
pub fn elementary_symmetric(values: &[f64], m: usize) -> Vec<f64> {
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for j in (1..=m.min(i + 1)).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e
}

/// `(σ₁, …, σₙ)` of the spectrum.
pub fn sigma_elementary(a: &SymMat) -> Vec<f64> {
    let ev = ordered_eigenvalues(a);
    let n = ev.len();
    elementary_symmetric(&ev.0, n)[1..].to_vec()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Coefficients of `s ↦ σ_k(A + sI)`, highest degree first:
/// `C(n−j, k−j) σ_j(A)` multiplies `s^{k−j}`.
pub fn sigma_k_polynomial(a: &SymMat, k: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    let ev = ordered_eigenvalues(a);
    let e = elementary_symmetric(&ev.0, k);
    Ok((0..=k).map(|j| binomial(n - j, k - j) * e[j]).collect())
}

fn shifted_sigma(ev: &[f64], j: usize, s: f64) -> f64 {
    let shifted: Vec<f64> = ev.iter().map(|l| l + s).collect();
    elementary_symmetric(&shifted, j)[j]
}

fn bisect_root(ev: &[f64], j: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = shifted_sigma(ev, j, lo);
    let fhi = shifted_sigma(ev, j, hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    if flo.signum() == fhi.signum() {
        // touching root at an endpoint
        return if flo.abs() <= fhi.abs() { lo } else { hi };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = shifted_sigma(ev, j, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The σ_k-Gårding eigenvalues of `A`: negated roots of `s ↦ σ_k(A + sI)`,
/// ascending. Roots are found by bisection on the interlacing chain
/// `σ₁, σ₂, …, σ_k` (each derivative is a multiple of the previous member),
/// then checked by re-expanding the product against the coefficients.
pub fn garding_roots_sigma_k(a: &SymMat, k: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    let g = garding_roots_unchecked(a, k);
    let coeffs = sigma_k_polynomial(a, k)?;
    let residue = garding_residue(&coeffs, n, &g);
    if !(residue <= 1e-8) {
        return Err(Error::GardingRoots { residue, coeffs });
    }
    Ok(g)
}

/// [`garding_roots_sigma_k`] without the re-expansion check (`1 ≤ k ≤ n` assumed).
pub fn garding_roots_unchecked(a: &SymMat, k: usize) -> Vec<f64> {
    let n = a.dim();
    let ev = ordered_eigenvalues(a).0;
    let (lmin, lmax) = (ev[0], ev[n - 1]);
    // s-roots of σ_j(λ + s), ascending; all lie in [−λmax, −λmin]
    let mut roots = vec![-ev.iter().sum::<f64>() / n as f64];
    for j in 2..=k {
        let mut next = Vec::with_capacity(j);
        let mut ends = Vec::with_capacity(j + 1);
        ends.push(-lmax);
        ends.extend(roots.iter().copied());
        ends.push(-lmin);
        for w in ends.windows(2) {
            let (lo, hi) = (w[0].min(w[1]), w[0].max(w[1]));
            next.push(bisect_root(&ev, j, lo, hi));
        }
        next.sort_by(f64::total_cmp);
        roots = next;
    }
    let mut g: Vec<f64> = roots.iter().map(|s| -s).collect();
    g.sort_by(f64::total_cmp);
    g
}

/// Relative mismatch between `C(n,k) ∏ (s + g_j)` and the coefficient vector.
pub fn garding_residue(coeffs: &[f64], n: usize, g: &[f64]) -> f64 {
    let k = g.len();
    // expand ∏ (s + g_j), highest degree first
    let mut prod = vec![1.0];
    for &gj in g {
        let mut next = vec![0.0; prod.len() + 1];
        for (i, &c) in prod.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c * gj;
        }
        prod = next;
    }
    let lead = binomial(n, k);
    let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    coeffs.iter().zip(&prod).map(|(c, p)| (c - lead * p).abs()).fold(0.0, f64::max) / scale
}

/// Largest imaginary part among the companion-matrix roots of the
/// coefficient vector (highest degree first). An independent check that the
/// σ_k polynomial is real-rooted.
pub fn companion_imaginary_residue(coeffs: &[f64]) -> f64 {
    let k = coeffs.len() - 1;
    if k == 0 {
        return 0.0;
    }
    let lead = coeffs[0];
    let mut c = DMatrix::zeros(k, k);
    for j in 0..k {
        c[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..k {
        c[(i, i - 1)] = 1.0;
    }
    c.complex_eigenvalues().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Seeded random sampling helpers shared by the property checks.
pub mod random {
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use super::{Jet2, SymMat};

    pub type Rng64 = ChaCha8Rng;

    pub fn rng(seed: u64) -> Rng64 {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn normal<R: Rng>(rng: &mut R) -> f64 {
        rng.sample(StandardNormal)
    }

    pub fn gaussian_vector<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(n, |_, _| normal(rng))
    }

    pub fn unit_vector<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
        loop {
            let v = gaussian_vector(n, rng);
            let l = v.norm();
            if l > 1e-8 {
                return v / l;
            }
        }
    }

    /// `½(G + Gᵗ)` with standard normal `G`.
    pub fn sym<R: Rng>(n: usize, rng: &mut R) -> SymMat {
        let g = DMatrix::from_fn(n, n, |_, _| normal(rng));
        SymMat::symmetrize(g)
    }

    /// `B Bᵗ / n`, rank deficient with probability `1/4`.
    pub fn psd<R: Rng>(n: usize, rng: &mut R) -> SymMat {
        let rank = if rng.random_bool(0.25) { rng.random_range(1..=n) } else { n };
        let b = DMatrix::from_fn(n, rank, |_, _| normal(rng));
        SymMat::symmetrize(&b * b.transpose() / n as f64)
    }

    /// Haar-distributed orthogonal matrix.
    pub fn orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| normal(rng));
        let qr = g.qr();
        let (q, r) = (qr.q(), qr.r());
        let mut q = q.into_owned();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        q
    }

    pub fn jet<R: Rng>(n: usize, rng: &mut R) -> Jet2 {
        Jet2 { r: normal(rng), p: gaussian_vector(n, rng), a: sym(n, rng) }
    }

    /// Uniform unit direction in the jet fiber.
    pub fn unit_jet<R: Rng>(n: usize, rng: &mut R) -> Jet2 {
        loop {
            let j = jet(n, rng);
            let l = j.norm();
            if l > 1e-8 {
                return j.scale(1.0 / l);
            }
        }
    }
}
