//! Dense algebra on small square matrices (n <= 3) and on linear maps between them.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Absolute determinant threshold below which inversion is refused.
pub const EPS_SINGULAR: f64 = 1e-14;

/// Asymmetry tolerated by [`sqrt_spd`].
pub const SPD_SYMMETRY_TOL: f64 = 1e-10;

/// Small column vector of length 1..=3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector<T> {
    dim: usize,
    e: [T; 3],
}

impl<T: Real> Vector<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
        Self { dim, e: [T::zero(); 3] }
    }

    pub fn from_slice(v: &[T]) -> Self {
        let mut out = Self::zeros(v.len());
        out.e[..v.len()].copy_from_slice(v);
        out
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut out = Self::zeros(dim);
        out.e[axis] = T::one();
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.e[..self.dim]
    }

    pub fn dot(&self, other: &Self) -> T {
        (0..self.dim).map(|i| self.e[i] * other.e[i]).sum()
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    /// Returns the vector scaled to unit length (unchanged if it is zero).
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            *self * (T::one() / n)
        } else {
            *self
        }
    }
}

impl<T: Real> Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        debug_assert!(i < self.dim);
        &self.e[i]
    }
}

impl<T: Real> IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        debug_assert!(i < self.dim);
        &mut self.e[i]
    }
}

impl<T: Real> Mul<T> for Vector<T> {
    type Output = Self;
    fn mul(mut self, s: T) -> Self {
        for x in self.e.iter_mut() {
            *x *= s;
        }
        self
    }
}

impl<T: Real> Sub for Vector<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            self.e[i] -= rhs.e[i];
        }
        self
    }
}

/// An `n x n` real matrix with `n` in {1, 2, 3}. Entries outside the active
/// block are kept at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    e: [[T; 3]; 3],
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
        Self {
            dim,
            e: [[T::zero(); 3]; 3],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.e[i][i] = T::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.e[i][j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[T]) -> Self {
        assert_eq!(entries.len(), dim * dim, "expected {} entries", dim * dim);
        Self::from_fn(dim, |i, j| entries[i * dim + j])
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.e[i][i] = x;
        }
        m
    }

    /// The rank-one matrix `a ⊗ b` with entries `a_i b_j`.
    pub fn outer(a: &Vector<T>, b: &Vector<T>) -> Self {
        Self::from_fn(a.dim(), |i, j| a[i] * b[j])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries of the active block.
    pub fn to_row_vec(&self) -> Vec<T> {
        let n = self.dim;
        (0..n * n).map(|k| self.e[k / n][k % n]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.e[j][i])
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.e[i][i]).sum()
    }

    pub fn det(&self) -> T {
        let e = &self.e;
        match self.dim {
            1 => e[0][0],
            2 => e[0][0] * e[1][1] - e[0][1] * e[1][0],
            _ => {
                e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
                    - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
                    + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
            }
        }
    }

    /// Adjugate (transposed cofactor matrix), so that `A adj(A) = det(A) Id`.
    pub fn adjugate(&self) -> Self {
        let e = &self.e;
        match self.dim {
            1 => Self::identity(1),
            2 => Self::from_row_slice(2, &[e[1][1], -e[0][1], -e[1][0], e[0][0]]),
            _ => {
                let c = |r0: usize, r1: usize, c0: usize, c1: usize| {
                    e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0]
                };
                Self::from_row_slice(
                    3,
                    &[
                        c(1, 2, 1, 2),
                        -c(0, 2, 1, 2),
                        c(0, 1, 1, 2),
                        -c(1, 2, 0, 2),
                        c(0, 2, 0, 2),
                        -c(0, 1, 0, 2),
                        c(1, 2, 0, 1),
                        -c(0, 2, 0, 1),
                        c(0, 1, 0, 1),
                    ],
                )
            }
        }
    }

    pub fn norm_sq(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.e[i][j] * self.e[i][j];
            }
        }
        s
    }

    /// Frobenius norm `|A| = tr(AᵀA)^{1/2}`.
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.e[i][j].abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.e[i][j].is_finite()))
    }

    pub fn mul_vec(&self, v: &Vector<T>) -> Vector<T> {
        let mut out = Vector::zeros(self.dim);
        for i in 0..self.dim {
            out[i] = (0..self.dim).map(|j| self.e[i][j] * v[j]).sum();
        }
        out
    }

    /// Integer power `A^k` (`A^0 = Id`).
    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..k {
            out = out * *self;
        }
        out
    }

    /// Eigenvalues of a general (not necessarily symmetric) matrix, from the
    /// characteristic polynomial. Symmetric input goes through Jacobi instead.
    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        let e = &self.e;
        if self.dim > 1 && skew(self).max_abs() <= T::epsilon() * self.max_abs() {
            // repeated roots are ill-conditioned in the polynomial route
            let (vals, _) = sym_eigen(self);
            return vals[..self.dim].iter().map(|&v| Complex::new(v, T::zero())).collect();
        }
        match self.dim {
            1 => vec![Complex::new(e[0][0], T::zero())],
            2 => {
                let (r1, r2) = quadratic_roots(-self.trace(), self.det());
                vec![r1, r2]
            }
            _ => {
                let minors = e[0][0] * e[1][1] - e[0][1] * e[1][0] + e[0][0] * e[2][2]
                    - e[0][2] * e[2][0]
                    + e[1][1] * e[2][2]
                    - e[1][2] * e[2][1];
                cubic_roots(-self.trace(), minors, -self.det()).to_vec()
            }
        }
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.dim && j < self.dim);
        &self.e[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.e[i][j]
    }
}

impl<T: Real> Add for SquareMatrix<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<T: Real> AddAssign for SquareMatrix<T> {
    fn add_assign(&mut self, rhs: Self) {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..3 {
            for j in 0..3 {
                self.e[i][j] += rhs.e[i][j];
            }
        }
    }
}

impl<T: Real> Sub for SquareMatrix<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<T: Real> SubAssign for SquareMatrix<T> {
    fn sub_assign(&mut self, rhs: Self) {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..3 {
            for j in 0..3 {
                self.e[i][j] -= rhs.e[i][j];
            }
        }
    }
}

impl<T: Real> Neg for SquareMatrix<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -T::one()
    }
}

impl<T: Real> Mul<T> for SquareMatrix<T> {
    type Output = Self;
    fn mul(mut self, s: T) -> Self {
        for row in self.e.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        self
    }
}

impl<T: Real> Mul for SquareMatrix<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        Self::from_fn(n, |i, j| (0..n).map(|k| self.e[i][k] * rhs.e[k][j]).sum())
    }
}

/// Symmetric part `(A + Aᵀ)/2`.
pub fn sym<T: Real>(a: &SquareMatrix<T>) -> SquareMatrix<T> {
    let half = T::lit(0.5);
    SquareMatrix::from_fn(a.dim, |i, j| half * (a.e[i][j] + a.e[j][i]))
}

/// Skew part `(A - Aᵀ)/2`.
pub fn skew<T: Real>(a: &SquareMatrix<T>) -> SquareMatrix<T> {
    let half = T::lit(0.5);
    SquareMatrix::from_fn(a.dim, |i, j| half * (a.e[i][j] - a.e[j][i]))
}

/// Frobenius inner product `A : B = tr(AᵀB)`.
pub fn frob<T: Real>(a: &SquareMatrix<T>, b: &SquareMatrix<T>) -> Result<T> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(a.dim, b.dim));
    }
    Ok(frob_unchecked(a, b))
}

#[inline]
pub(crate) fn frob_unchecked<T: Real>(a: &SquareMatrix<T>, b: &SquareMatrix<T>) -> T {
    let mut s = T::zero();
    for i in 0..a.dim {
        for j in 0..a.dim {
            s += a.e[i][j] * b.e[i][j];
        }
    }
    s
}

/// Determinant and inverse; refuses matrices with `|det| <= 1e-14`.
pub fn det_inv<T: Real>(a: &SquareMatrix<T>) -> Result<(T, SquareMatrix<T>)> {
    let d = a.det();
    if !(d.abs() > T::lit(EPS_SINGULAR)) {
        return Err(Error::SingularMatrix {
            det: d.to_f64_lossy(),
        });
    }
    Ok((d, a.adjugate() * (T::one() / d)))
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns the eigenvalues and a matrix whose columns are the eigenvectors.
pub fn sym_eigen<T: Real>(a: &SquareMatrix<T>) -> ([T; 3], SquareMatrix<T>) {
    let n = a.dim;
    let mut m = sym(a);
    let mut v = SquareMatrix::identity(n);
    let scale = m.max_abs().max(T::min_positive_value());
    for _sweep in 0..50 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.e[p][q] * m.e[p][q];
            }
        }
        if off.sqrt() <= T::epsilon() * T::lit(1e-3) * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.e[p][q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m.e[q][q] - m.e[p][p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.e[k][p];
                    let mkq = m.e[k][q];
                    m.e[k][p] = c * mkp - s * mkq;
                    m.e[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m.e[p][k];
                    let mqk = m.e[q][k];
                    m.e[p][k] = c * mpk - s * mqk;
                    m.e[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v.e[k][p];
                    let vkq = v.e[k][q];
                    v.e[k][p] = c * vkp - s * vkq;
                    v.e[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut vals = [T::zero(); 3];
    for i in 0..n {
        vals[i] = m.e[i][i];
    }
    (vals, v)
}

/// Smallest eigenvalue of a symmetric matrix with a unit eigenvector.
pub fn sym_min_eigen<T: Real>(a: &SquareMatrix<T>) -> (T, Vector<T>) {
    let (vals, vecs) = sym_eigen(a);
    let n = a.dim;
    let mut k = 0;
    for i in 1..n {
        if vals[i] < vals[k] {
            k = i;
        }
    }
    let mut v = Vector::zeros(n);
    for i in 0..n {
        v[i] = vecs.e[i][k];
    }
    (vals[k], v.normalized())
}

/// Principal square root of a symmetric positive definite matrix.
pub fn sqrt_spd<T: Real>(a: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    let scale = a.max_abs().max(T::one());
    let asym = skew(a).max_abs();
    if !(asym <= T::lit(SPD_SYMMETRY_TOL) * scale) {
        return Err(Error::NotSpd(format!("asymmetry {:e}", asym.to_f64_lossy())));
    }
    let (vals, vecs) = sym_eigen(a);
    let n = a.dim;
    let mut root = [T::zero(); 3];
    for i in 0..n {
        if !(vals[i] > T::zero()) {
            return Err(Error::NotSpd(format!(
                "eigenvalue {:e}",
                vals[i].to_f64_lossy()
            )));
        }
        root[i] = vals[i].sqrt();
    }
    let s = SquareMatrix::from_fn(n, |i, j| (0..n).map(|k| vecs.e[i][k] * root[k] * vecs.e[j][k]).sum());
    Ok(sym(&s))
}

/// Deterministic rotation in SO(dim) obtained by exponentiating a random skew
/// matrix whose rotation angle lies in [0, π].
pub fn random_rotation<T: Real>(dim: usize, seed: u64) -> SquareMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_rotation(&mut rng, dim)
}

/// Draws a rotation from an existing generator (see [`random_rotation`]).
pub fn sample_rotation<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> SquareMatrix<T> {
    match dim {
        1 => SquareMatrix::identity(1),
        2 => {
            let angle: f64 = rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI);
            let (s, c) = angle.sin_cos();
            SquareMatrix::from_row_slice(2, &[T::lit(c), T::lit(-s), T::lit(s), T::lit(c)])
        }
        3 => {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).max(0.0).sqrt();
            let axis = [r * phi.cos(), r * phi.sin(), z];
            let angle: f64 = rng.gen_range(0.0..=std::f64::consts::PI);
            // Rodrigues: exp(θK) = Id + sin θ K + (1 - cos θ) K² for the unit-axis generator K
            let k = SquareMatrix::from_row_slice(
                3,
                &[
                    0.0, -axis[2], axis[1], //
                    axis[2], 0.0, -axis[0], //
                    -axis[1], axis[0], 0.0,
                ],
            );
            let rot = SquareMatrix::identity(3) + k * angle.sin() + (k * k) * (1.0 - angle.cos());
            SquareMatrix::from_fn(3, |i, j| T::lit(rot.e[i][j]))
        }
        _ => panic!("rotation dimension must be 1, 2 or 3"),
    }
}

/// Roots of `x² + b x + c`.
fn quadratic_roots<T: Real>(b: T, c: T) -> (Complex<T>, Complex<T>) {
    let half_b = b * T::lit(0.5);
    let disc = half_b * half_b - c;
    if disc >= T::zero() {
        let sq = disc.sqrt();
        // avoid cancellation: compute the larger-magnitude root first
        let big = if half_b > T::zero() { -half_b - sq } else { -half_b + sq };
        let small = if big != T::zero() { c / big } else { T::zero() };
        (Complex::new(big, T::zero()), Complex::new(small, T::zero()))
    } else {
        let im = (-disc).sqrt();
        (Complex::new(-half_b, im), Complex::new(-half_b, -im))
    }
}

/// Roots of `x³ + a x² + b x + c`: one real root by the closed form, polished
/// by Newton's method, then deflation to a quadratic.
fn cubic_roots<T: Real>(a: T, b: T, c: T) -> [Complex<T>; 3] {
    let af = a.to_f64_lossy();
    let bf = b.to_f64_lossy();
    let cf = c.to_f64_lossy();
    let p = bf - af * af / 3.0;
    let q = 2.0 * af * af * af / 27.0 - af * bf / 3.0 + cf;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let t = if disc > 0.0 {
        let s = disc.sqrt();
        (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()
    } else if p < 0.0 {
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        2.0 * r * (arg.acos() / 3.0).cos()
    } else {
        0.0
    };
    let mut x = t - af / 3.0;
    for _ in 0..4 {
        let f = ((x + af) * x + bf) * x + cf;
        let df = (3.0 * x + 2.0 * af) * x + bf;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    let r = T::lit(x);
    let (r1, r2) = quadratic_roots(a + r, b + r * (a + r));
    [Complex::new(r, T::zero()), r1, r2]
}

/// A linear map on `n x n` matrices, stored as an `n² x n²` array acting on
/// row-major vectorised matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourthOrderTensor<T> {
    dim: usize,
    e: [[T; 9]; 9],
}

impl<T: Real> FourthOrderTensor<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
        Self {
            dim,
            e: [[T::zero(); 9]; 9],
        }
    }

    /// The identity map `Q ↦ Q`.
    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for k in 0..dim * dim {
            t.e[k][k] = T::one();
        }
        t
    }

    /// `Q ↦ sym(Q)`.
    pub fn sym_map(dim: usize) -> Self {
        Self::from_map(dim, |q| sym(q))
    }

    /// Tabulates a linear map by applying it to the matrix basis.
    pub fn from_map(dim: usize, f: impl Fn(&SquareMatrix<T>) -> SquareMatrix<T>) -> Self {
        let mut t = Self::zeros(dim);
        let nn = dim * dim;
        for col in 0..nn {
            let mut basis = SquareMatrix::zeros(dim);
            basis[(col / dim, col % dim)] = T::one();
            let image = f(&basis);
            for row in 0..nn {
                t.e[row][col] = image[(row / dim, row % dim)];
            }
        }
        t
    }

    /// Builds from an `n² x n²` row-major array.
    pub fn from_flat(dim: usize, entries: &[T]) -> Self {
        let nn = dim * dim;
        assert_eq!(entries.len(), nn * nn);
        let mut t = Self::zeros(dim);
        for r in 0..nn {
            for c in 0..nn {
                t.e[r][c] = entries[r * nn + c];
            }
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry coupling output component `(i, j)` to input component `(k, l)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        let n = self.dim;
        self.e[i * n + j][k * n + l]
    }

    pub fn apply(&self, q: &SquareMatrix<T>) -> SquareMatrix<T> {
        let n = self.dim;
        let nn = n * n;
        let mut out = SquareMatrix::zeros(n);
        for r in 0..nn {
            let mut s = T::zero();
            for c in 0..nn {
                s += self.e[r][c] * q.e[c / n][c % n];
            }
            out.e[r / n][r % n] = s;
        }
        out
    }

    /// The quadratic form `⟨M(a⊗b) : a⊗b⟩`.
    pub fn rank_one_form(&self, a: &Vector<T>, b: &Vector<T>) -> T {
        let q = SquareMatrix::outer(a, b);
        frob_unchecked(&self.apply(&q), &q)
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut t = *self;
        for row in t.e.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        let nn = self.dim * self.dim;
        (0..nn).all(|r| (0..nn).all(|c| self.e[r][c].is_finite()))
    }

    /// Whether the map is self-adjoint with respect to the Frobenius product.
    pub fn is_symmetric(&self, tol: T) -> bool {
        let nn = self.dim * self.dim;
        let scale = self.max_abs().max(T::one());
        (0..nn).all(|r| (0..r).all(|c| (self.e[r][c] - self.e[c][r]).abs() <= tol * scale))
    }

    pub fn max_abs(&self) -> T {
        let nn = self.dim * self.dim;
        let mut m = T::zero();
        for r in 0..nn {
            for c in 0..nn {
                m = m.max(self.e[r][c].abs());
            }
        }
        m
    }
}
