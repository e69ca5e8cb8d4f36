//! Checks of the Korn-type coercivity condition on the viscous tangent
//! `M = D_Q Z(F0, Q0)`.
//!
//! The condition `‖∇ζ‖² ≤ γ ∫ M∇ζ : ∇ζ` is equivalent to positivity of `M` on
//! rank-one matrices, `|a|²|b|² ≤ γ ⟨M(a⊗b) : a⊗b⟩`. The routines here
//! estimate the optimal `γ` from the rank-one form, compare it with closed-form
//! constants for the catalogue tensors, locate the spectra of the acoustic maps
//! `a ↦ M(a⊗k)k`, and sample the Fourier-side ratio on periodic fields.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{viscous_tangent_q, ViscosityModel};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{det_inv, sym, sym_min_eigen, FourthOrderTensor, SquareMatrix, Vector};

/// Threshold on `|det sym(Q0 F0⁻¹)|` below which the `Zm` (m >= 1) constants
/// are undefined.
pub const DEGENERATE_Q_TOL: f64 = 1e-12;

/// Grid resolution used by [`check_initial_data`] callers that have no
/// preference.
pub const DEFAULT_RESOLUTION: usize = 360;
pub const DEFAULT_REFINE_ITERS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankOneResult<T> {
    pub ratio_min: T,
    /// `1 / ratio_min`, or `+∞` when the rank-one form is not positive.
    pub gamma_est: T,
    pub a_star: Vector<T>,
    pub b_star: Vector<T>,
    /// Number of directions `a` at which the inner minimisation was evaluated.
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumReport<T> {
    pub min_real_part: T,
    /// Largest `|arg σ|` in radians.
    pub max_abs_arg: T,
    pub directions_scanned: usize,
    pub elliptic: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformGammaReport<T> {
    pub gamma_sup: T,
    pub gamma_inf: T,
    pub worst_node: usize,
    pub pass: bool,
}

/// `K(a)_{jl} = Σ_{ik} a_i a_k M_{ij,kl}`, so that `bᵀK(a)b = ⟨M(a⊗b) : a⊗b⟩`.
fn contracted_form<T: Real>(m: &FourthOrderTensor<T>, a: &Vector<T>) -> SquareMatrix<T> {
    let n = m.dim();
    SquareMatrix::from_fn(n, |j, l| {
        let mut s = T::zero();
        for i in 0..n {
            for k in 0..n {
                s += a[i] * a[k] * m.get(i, j, k, l);
            }
        }
        s
    })
}

fn direction<T: Real>(dim: usize, angles: &[T]) -> Vector<T> {
    match dim {
        1 => Vector::from_slice(&[T::one()]),
        2 => Vector::from_slice(&[angles[0].cos(), angles[0].sin()]),
        _ => {
            let (st, ct) = angles[0].sin_cos();
            let (sp, cp) = angles[1].sin_cos();
            Vector::from_slice(&[st * cp, st * sp, ct])
        }
    }
}

/// Minimum over unit `b` of the rank-one ratio for fixed unit `a`.
fn inner_min<T: Real>(m: &FourthOrderTensor<T>, a: &Vector<T>) -> (T, Vector<T>) {
    sym_min_eigen(&sym(&contracted_form(m, a)))
}

fn golden_section<T: Real>(mut lo: T, mut hi: T, mut f: impl FnMut(T) -> T) -> (T, T) {
    let inv_phi = T::lit(0.5 * (5f64.sqrt() - 1.0));
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if (hi - lo).abs() <= T::epsilon() * T::lit(16.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimises `⟨M(a⊗b) : a⊗b⟩ / (|a|²|b|²)` over unit vectors.
///
/// The direction `a` is scanned on an angular grid with `angular_resolution`
/// points per sphere coordinate; for each `a` the minimum over `b` is the
/// smallest eigenvalue of the symmetric contraction `K(a)`. The best grid cell
/// is then refined by `refine_iters` rounds of golden-section search per
/// coordinate.
pub fn rank_one_min<T: Real>(
    m: &FourthOrderTensor<T>,
    angular_resolution: usize,
    refine_iters: usize,
) -> RankOneResult<T> {
    let n = m.dim();
    let res = angular_resolution.max(8);
    let pi = T::PI();
    let mut samples = 0usize;
    let mut eval = |angles: &[T]| -> T {
        samples += 1;
        inner_min(m, &direction(n, angles)).0
    };

    let mut best_angles = [T::zero(); 2];
    let mut cell = [T::zero(); 2];
    let coords = n.saturating_sub(1);
    if n >= 2 {
        let mut best = T::infinity();
        if n == 2 {
            cell[0] = pi / T::from_count(res);
            for i in 0..res {
                let t = cell[0] * T::from_count(i);
                let v = eval(&[t]);
                if v < best {
                    best = v;
                    best_angles[0] = t;
                }
            }
        } else {
            cell[0] = pi / T::from_count(res - 1);
            cell[1] = pi / T::from_count(res);
            for i in 0..res {
                let theta = cell[0] * T::from_count(i);
                for j in 0..res {
                    let phi = cell[1] * T::from_count(j);
                    let v = eval(&[theta, phi]);
                    if v < best {
                        best = v;
                        best_angles = [theta, phi];
                    }
                }
            }
        }
        let mut width = cell;
        for _ in 0..refine_iters {
            for c in 0..coords {
                let centre = best_angles[c];
                let (x, v) = golden_section(centre - width[c], centre + width[c], |x| {
                    let mut ang = best_angles;
                    ang[c] = x;
                    eval(&ang[..coords])
                });
                if v < best {
                    best = v;
                    best_angles[c] = x;
                }
                width[c] = width[c] * T::lit(0.5);
            }
        }
    } else {
        samples += 1;
    }

    let a = direction(n, &best_angles[..coords]);
    let (_, b) = inner_min(m, &a);
    let ratio_min = m.rank_one_form(&a, &b);
    let gamma_est = if ratio_min > T::zero() {
        T::one() / ratio_min
    } else {
        T::infinity()
    };
    RankOneResult {
        ratio_min,
        gamma_est,
        a_star: a,
        b_star: b,
        samples,
    }
}

/// Closed-form Korn constants for the catalogue viscous tensors:
///
/// * `Z0″`: `|F0⁻ᵀ|²`
/// * `Z0′`: `|F0|² / det F0`
/// * `Z0`:  `½|F0|²`
/// * `Z1`:  `2|F0|² |sym(Q0F0⁻¹)⁻¹|²`
/// * `Z2`:  `2|F0|² |sym(Q0F0⁻¹)⁻¹|⁴`
///
/// The `Z0` value is returned as stated even though it is not a valid upper
/// bound on the optimal constant (at `F0 = Id`, n = 2 it gives 1 while the
/// optimum is 2); callers compare it against [`rank_one_min`].
pub fn closed_form_gamma<T: Real>(
    model: &ViscosityModel,
    f0: &SquareMatrix<T>,
    q0: &SquareMatrix<T>,
) -> Result<T> {
    let det = f0.det();
    if !(det > T::zero()) {
        return Err(Error::DomainError(format!("det F0 = {det} is not positive")));
    }
    let (_, inv) = det_inv(f0)?;
    let f_sq = f0.norm_sq();
    match *model {
        ViscosityModel::Z0DoublePrime => Ok(inv.transpose().norm_sq()),
        ViscosityModel::Z0Prime => Ok(f_sq / det),
        ViscosityModel::Zm { m: 0 } => Ok(T::lit(0.5) * f_sq),
        ViscosityModel::Zm { m } if m <= 2 => {
            let a = sym(&(*q0 * inv));
            let det_a = a.det();
            if !(det_a.abs() > T::lit(DEGENERATE_Q_TOL)) {
                return Err(Error::DegenerateQ {
                    det: det_a.to_f64_lossy(),
                });
            }
            let (_, a_inv) = det_inv(&a).map_err(|_| Error::DegenerateQ {
                det: det_a.to_f64_lossy(),
            })?;
            Ok(T::lit(2.0) * f_sq * a_inv.norm_sq().powi(m as i32))
        }
        ViscosityModel::Zm { m } => Err(Error::Unsupported(format!(
            "no closed-form constant for m = {m}"
        ))),
    }
}

/// The acoustic map `a ↦ M(a⊗k)k` as an `n x n` matrix.
pub fn acoustic_tensor<T: Real>(m: &FourthOrderTensor<T>, k: &Vector<T>) -> SquareMatrix<T> {
    let n = m.dim();
    SquareMatrix::from_fn(n, |i, j| {
        let mut s = T::zero();
        for l in 0..n {
            for q in 0..n {
                s += m.get(i, l, j, q) * k[l] * k[q];
            }
        }
        s
    })
}

/// Eigenvalues of the acoustic map for a unit direction `k`.
pub fn acoustic_spectrum<T: Real>(m: &FourthOrderTensor<T>, k: &Vector<T>) -> Vec<Complex<T>> {
    debug_assert!((k.norm() - T::one()).abs() <= T::lit(1e-6));
    acoustic_tensor(m, k).eigenvalues()
}

/// Quasi-uniform unit directions: equally spaced angles in 2D, a Fibonacci
/// lattice in 3D.
pub fn scan_directions<T: Real>(dim: usize, count: usize) -> Vec<Vector<T>> {
    match dim {
        1 => vec![Vector::from_slice(&[T::one()])],
        2 => (0..count)
            .map(|i| {
                let t = T::TAU() * T::from_count(i) / T::from_count(count);
                Vector::from_slice(&[t.cos(), t.sin()])
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    Vector::from_slice(&[T::lit(r * phi.cos()), T::lit(r * phi.sin()), T::lit(z)])
                })
                .collect()
        }
    }
}

/// Scans acoustic spectra over `num_directions` unit directions.
pub fn sector_scan<T: Real>(m: &FourthOrderTensor<T>, num_directions: usize) -> SpectrumReport<T> {
    let dirs = scan_directions::<T>(m.dim(), num_directions.max(m.dim() + 1));
    let mut min_re = T::infinity();
    let mut max_arg = T::zero();
    for k in &dirs {
        for z in acoustic_spectrum(m, k) {
            min_re = min_re.min(z.re);
            max_arg = max_arg.max(z.im.atan2(z.re).abs());
        }
    }
    SpectrumReport {
        min_real_part: min_re,
        max_abs_arg: max_arg,
        directions_scanned: dirs.len(),
        elliptic: min_re > T::zero() && max_arg < T::FRAC_PI_2(),
    }
}

/// A real trigonometric vector field on the unit torus,
/// `ζ(x) = Σ c_k cos(2π k·x) + s_k sin(2π k·x)` over nonzero integer modes
/// taken from a half-space (so `k` and `−k` never both appear).
#[derive(Clone, Debug, PartialEq)]
pub struct TrigField<T> {
    pub dim: usize,
    pub modes: Vec<TrigMode<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrigMode<T> {
    pub wave: [i64; 3],
    pub cos_coef: Vector<T>,
    pub sin_coef: Vector<T>,
}

impl<T: Real> TrigField<T> {
    /// `∫⟨M∇ζ : ∇ζ⟩ / ‖∇ζ‖²`, summed exactly mode by mode.
    ///
    /// Distinct modes are orthogonal on the torus, so both integrals split into
    /// sums of rank-one forms `⟨M(c⊗k) : c⊗k⟩` (the common factor `2π²`
    /// cancels).
    pub fn korn_ratio(&self, m: &FourthOrderTensor<T>) -> T {
        let mut num = T::zero();
        let mut den = T::zero();
        for mode in &self.modes {
            let mut k = Vector::zeros(self.dim);
            for i in 0..self.dim {
                k[i] = T::lit(mode.wave[i] as f64);
            }
            let k_sq = k.dot(&k);
            for c in [&mode.cos_coef, &mode.sin_coef] {
                num += m.rank_one_form(c, &k);
                den += c.dot(c) * k_sq;
            }
        }
        num / den
    }
}

/// Nonzero integer wave vectors with `|k| <= max_modes`, one of each `±k` pair.
pub fn half_space_modes(dim: usize, max_modes: usize) -> Vec<[i64; 3]> {
    let r = max_modes as i64;
    let mut out = Vec::new();
    let range = |active: bool| if active { -r..=r } else { 0..=0 };
    for x in range(true) {
        for y in range(dim >= 2) {
            for z in range(dim >= 3) {
                let k = [x, y, z];
                if x * x + y * y + z * z > r * r {
                    continue;
                }
                let first = k.iter().copied().find(|&c| c != 0);
                if first.is_some_and(|c| c > 0) {
                    out.push(k);
                }
            }
        }
    }
    out
}

/// Draws `num_fields` random trigonometric fields and returns the smallest
/// Korn ratio observed.
pub fn fourier_korn_sample<T: Real>(
    m: &FourthOrderTensor<T>,
    num_fields: usize,
    max_modes: usize,
    seed: u64,
) -> T {
    let dim = m.dim();
    let modes = half_space_modes(dim, max_modes.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::infinity();
    for _ in 0..num_fields.max(1) {
        let active = rng.gen_range(1..=modes.len().min(8));
        let mut field = TrigField {
            dim,
            modes: Vec::with_capacity(active),
        };
        for _ in 0..active {
            let wave = modes[rng.gen_range(0..modes.len())];
            let amp: f64 = rng.gen_range(0.05..=1.0);
            let mut coef = || {
                let mut v = Vector::zeros(dim);
                for i in 0..dim {
                    v[i] = T::lit(amp * rng.gen_range(-1.0..=1.0));
                }
                v
            };
            let cos_coef = coef();
            let sin_coef = coef();
            // repeated wave vectors are merged so the orthogonality argument holds
            if let Some(existing) = field.modes.iter_mut().find(|md| md.wave == wave) {
                for i in 0..dim {
                    existing.cos_coef[i] += cos_coef[i];
                    existing.sin_coef[i] += sin_coef[i];
                }
            } else {
                field.modes.push(TrigMode {
                    wave,
                    cos_coef,
                    sin_coef,
                });
            }
        }
        let r = field.korn_ratio(m);
        if r.is_finite() {
            worst = worst.min(r);
        }
    }
    worst
}

/// Evaluates the rank-one constant of `D_Q Z(F0(X), Q0(X))` at every sample
/// point and reports its extremes.
pub fn check_initial_data<T: Real>(
    model: &ViscosityModel,
    grid_f0: &[SquareMatrix<T>],
    grid_q0: &[SquareMatrix<T>],
    resolution: usize,
) -> Result<UniformGammaReport<T>> {
    if grid_f0.is_empty() {
        return Err(Error::InvalidConfig("no sample points".into()));
    }
    if grid_f0.len() != grid_q0.len() {
        return Err(Error::DimensionMismatch(grid_f0.len(), grid_q0.len()));
    }
    let mut sup = T::neg_infinity();
    let mut inf = T::infinity();
    let mut worst = 0;
    for (node, (f0, q0)) in grid_f0.iter().zip(grid_q0).enumerate() {
        let at = |e: Error| Error::AtNode {
            node,
            source: Box::new(e),
        };
        if !(f0.det() > T::zero()) {
            return Err(at(Error::DomainError(format!(
                "det F0 = {} is not positive",
                f0.det()
            ))));
        }
        let tangent = viscous_tangent_q(model, f0, q0).map_err(at)?;
        let gamma = rank_one_min(&tangent, resolution, DEFAULT_REFINE_ITERS).gamma_est;
        if gamma > sup || (node == 0 && gamma == sup) {
            sup = gamma;
            worst = node;
        }
        inf = inf.min(gamma);
    }
    Ok(UniformGammaReport {
        gamma_sup: sup,
        gamma_inf: inf,
        worst_node: worst,
        pass: sup.is_finite(),
    })
}
