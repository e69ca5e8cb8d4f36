//! Elastic energy densities, viscous stress tensors, their derivatives, and
//! randomized checks of the mechanical axioms they must satisfy.
//!
//! Catalogue:
//!
//! | model | formula |
//! |-------|---------|
//! | `W0`  | `|FᵀF − Id|²` |
//! | `W1`  | `|(FᵀF)^{1/2} − Id|² + |log det F|^q` |
//! | `W2`  | `|(FᵀF)^{1/2} − Id|² + |1/det F − 1|^q` |
//! | `Zm`  | `[sym(QF⁻¹)]^{2m+1} F⁻ᵀ` |
//! | `Z0′` | `2 (det F) sym(QF⁻¹) F⁻ᵀ` |
//! | `Z0″` | `2 F sym(FᵀQ)` |
//!
//! `W1` and `W2` are `+∞` when `det F <= 0`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{det_inv, frob_unchecked, sample_rotation, skew, sqrt_spd, sym, FourthOrderTensor, SquareMatrix};

/// Finite-difference step for the Piola stress of `W1`/`W2`.
pub const PIOLA_FD_STEP: f64 = 1e-4;

/// Default residual tolerance for [`validate_axioms`].
pub const DEFAULT_AXIOM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyModel<T> {
    W0,
    W1 { q: T },
    W2 { q: T },
}

impl<T: Real> EnergyModel<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EnergyModel::W0 => Ok(()),
            EnergyModel::W1 { q } | EnergyModel::W2 { q } => {
                if q > T::one() && q.is_finite() {
                    Ok(())
                } else {
                    Err(Error::DomainError(format!("energy exponent q = {q} must exceed 1")))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnergyModel::W0 => "w0",
            EnergyModel::W1 { .. } => "w1",
            EnergyModel::W2 { .. } => "w2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViscosityModel {
    Zm { m: u32 },
    Z0Prime,
    Z0DoublePrime,
}

impl ViscosityModel {
    /// Models whose stress is linear in the velocity gradient.
    pub fn is_linear_in_q(&self) -> bool {
        matches!(
            self,
            ViscosityModel::Z0Prime | ViscosityModel::Z0DoublePrime | ViscosityModel::Zm { m: 0 }
        )
    }

    pub fn name(&self) -> String {
        match self {
            ViscosityModel::Zm { m } => format!("z{m}"),
            ViscosityModel::Z0Prime => "z0prime".into(),
            ViscosityModel::Z0DoublePrime => "z0doubleprime".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstitutiveModel<T> {
    pub energy: EnergyModel<T>,
    pub viscosity: ViscosityModel,
}

impl<T: Real> ConstitutiveModel<T> {
    pub fn new(energy: EnergyModel<T>, viscosity: ViscosityModel) -> Result<Self> {
        energy.validate()?;
        Ok(Self { energy, viscosity })
    }
}

/// Worst-case residuals of the frame-invariance, angular-momentum and
/// dissipation axioms over random samples.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub samples_tested: usize,
    pub max_frame_invariance_residual_w: f64,
    pub max_frame_invariance_residual_z: f64,
    pub max_angular_momentum_residual: f64,
    pub min_dissipation: f64,
    pub pass: bool,
}

/// Stored energy density. Returns `+∞` for `W1`/`W2` when `det F <= 0`.
pub fn energy<T: Real>(model: &EnergyModel<T>, f: &SquareMatrix<T>) -> T {
    let n = f.dim();
    match *model {
        EnergyModel::W0 => (f.transpose() * *f - SquareMatrix::identity(n)).norm_sq(),
        EnergyModel::W1 { q } | EnergyModel::W2 { q } => {
            let det = f.det();
            if !(det > T::zero()) {
                return T::infinity();
            }
            let stretch = match sqrt_spd(&(f.transpose() * *f)) {
                Ok(u) => u,
                Err(_) => return T::infinity(),
            };
            let shape = (stretch - SquareMatrix::identity(n)).norm_sq();
            let volumetric = match model {
                EnergyModel::W1 { .. } => det.ln().abs(),
                _ => (T::one() / det - T::one()).abs(),
            };
            shape + volumetric.powf(q)
        }
    }
}

/// Piola–Kirchhoff stress `DW(F)`.
pub fn piola_stress<T: Real>(model: &EnergyModel<T>, f: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    let n = f.dim();
    match model {
        EnergyModel::W0 => Ok((*f * (f.transpose() * *f - SquareMatrix::identity(n))) * T::lit(4.0)),
        _ => {
            if !(f.det() > T::zero()) {
                return Err(Error::DomainError(format!(
                    "det F = {} is not positive",
                    f.det()
                )));
            }
            let h = T::lit(PIOLA_FD_STEP);
            let weights = [
                (T::lit(1.0), T::lit(45.0)),
                (T::lit(2.0), T::lit(-9.0)),
                (T::lit(3.0), T::lit(1.0)),
            ];
            let mut out = SquareMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = T::zero();
                    for &(k, w) in &weights {
                        let mut fp = *f;
                        fp[(i, j)] += k * h;
                        let mut fm = *f;
                        fm[(i, j)] -= k * h;
                        acc += w * (energy(model, &fp) - energy(model, &fm));
                    }
                    let d = acc / (T::lit(60.0) * h);
                    if !d.is_finite() {
                        return Err(Error::DomainError(
                            "finite-difference stencil crossed det F = 0".into(),
                        ));
                    }
                    out[(i, j)] = d;
                }
            }
            Ok(out)
        }
    }
}

fn odd_power_sym<T: Real>(a: &SquareMatrix<T>, m: u32) -> SquareMatrix<T> {
    // a^{2m+1} stays symmetric in exact arithmetic
    sym(&a.powi(2 * m + 1))
}

/// Viscous stress `Z(F, Q)`.
pub fn viscous_stress<T: Real>(
    model: &ViscosityModel,
    f: &SquareMatrix<T>,
    q: &SquareMatrix<T>,
) -> Result<SquareMatrix<T>> {
    match *model {
        ViscosityModel::Z0DoublePrime => Ok((*f * sym(&(f.transpose() * *q))) * T::lit(2.0)),
        ViscosityModel::Z0Prime => {
            let (det, inv) = det_inv(f)?;
            Ok(sym(&(*q * inv)) * inv.transpose() * (T::lit(2.0) * det))
        }
        ViscosityModel::Zm { m } => {
            let (_, inv) = det_inv(f)?;
            let b = sym(&(*q * inv));
            Ok(odd_power_sym(&b, m) * inv.transpose())
        }
    }
}

/// The derivative `Q ↦ D_Q Z(F0, Q0)[Q]` in closed form.
pub fn viscous_tangent_q<T: Real>(
    model: &ViscosityModel,
    f0: &SquareMatrix<T>,
    q0: &SquareMatrix<T>,
) -> Result<FourthOrderTensor<T>> {
    let n = f0.dim();
    let two = T::lit(2.0);
    match *model {
        ViscosityModel::Z0DoublePrime => {
            let f = *f0;
            Ok(FourthOrderTensor::from_map(n, |q| (f * sym(&(f.transpose() * *q))) * two))
        }
        ViscosityModel::Z0Prime => {
            let (det, inv) = det_inv(f0)?;
            let inv_t = inv.transpose();
            Ok(FourthOrderTensor::from_map(n, |q| {
                sym(&(*q * inv)) * inv_t * (two * det)
            }))
        }
        ViscosityModel::Zm { m } => {
            let (_, inv) = det_inv(f0)?;
            let inv_t = inv.transpose();
            let a = sym(&(*q0 * inv));
            let powers: Vec<SquareMatrix<T>> = (0..=2 * m).map(|j| a.powi(j)).collect();
            let top = 2 * m as usize;
            Ok(FourthOrderTensor::from_map(n, |q| {
                let b = sym(&(*q * inv));
                let mut acc = SquareMatrix::zeros(n);
                for j in 0..=top {
                    acc += powers[j] * b * powers[top - j];
                }
                acc * inv_t
            }))
        }
    }
}

/// Dissipation density `Z(F, Q) : Q`.
pub fn dissipation_density<T: Real>(
    model: &ViscosityModel,
    f: &SquareMatrix<T>,
    q: &SquareMatrix<T>,
) -> Result<T> {
    let z = viscous_stress(model, f, q)?;
    Ok(frob_unchecked(&z, q))
}

/// Random deformation gradient `R1 diag(d) R2` with `d ∈ [0.5, 2]ⁿ`.
pub fn sample_deformation<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> SquareMatrix<T> {
    let r1: SquareMatrix<T> = sample_rotation(rng, dim);
    let r2: SquareMatrix<T> = sample_rotation(rng, dim);
    let d: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(0.5..=2.0))).collect();
    r1 * SquareMatrix::from_diagonal(&d) * r2
}

pub fn sample_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> SquareMatrix<T> {
    SquareMatrix::from_fn(dim, |_, _| T::lit(rng.gen_range(-1.0..=1.0)))
}

fn rel<T: Real>(residual: T, scale: T) -> f64 {
    (residual / scale.max(T::one())).to_f64_lossy()
}

/// Samples random admissible `(F, Q, R, K)` and records the worst residuals
/// of `W(RF) = W(F)`, `skew(F⁻¹Z) = 0`, `Z(RF, RKF + RQ) = R Z(F, Q)` and the
/// smallest `Z : Q`. Residuals are measured relative to `max(1, |value|)`.
pub fn validate_axioms<T: Real>(
    model: &ConstitutiveModel<T>,
    dim: usize,
    num_samples: usize,
    seed: u64,
    tol: f64,
) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AxiomReport {
        samples_tested: 0,
        max_frame_invariance_residual_w: 0.0,
        max_frame_invariance_residual_z: 0.0,
        max_angular_momentum_residual: 0.0,
        min_dissipation: f64::INFINITY,
        pass: false,
    };
    let mut failed = false;
    for _ in 0..num_samples {
        let f: SquareMatrix<T> = sample_deformation(&mut rng, dim);
        let q: SquareMatrix<T> = sample_matrix(&mut rng, dim);
        let r: SquareMatrix<T> = sample_rotation(&mut rng, dim);
        let k = skew(&sample_matrix::<T, _>(&mut rng, dim));

        let w = energy(&model.energy, &f);
        let w_rot = energy(&model.energy, &(r * f));
        let res_w = rel((w_rot - w).abs(), w.abs());

        let (z, inv) = match (viscous_stress(&model.viscosity, &f, &q), det_inv(&f)) {
            (Ok(z), Ok((_, inv))) => (z, inv),
            _ => {
                failed = true;
                continue;
            }
        };
        let s = inv * z;
        let res_ang = rel(skew(&s).norm(), s.norm());

        let q_rot = r * k * f + r * q;
        let res_z = match viscous_stress(&model.viscosity, &(r * f), &q_rot) {
            Ok(z_rot) => rel((z_rot - r * z).norm(), z.norm()),
            Err(_) => f64::INFINITY,
        };
        let diss = frob_unchecked(&z, &q).to_f64_lossy();

        report.samples_tested += 1;
        report.max_frame_invariance_residual_w = report.max_frame_invariance_residual_w.max(res_w);
        report.max_frame_invariance_residual_z = report.max_frame_invariance_residual_z.max(res_z);
        report.max_angular_momentum_residual = report.max_angular_momentum_residual.max(res_ang);
        report.min_dissipation = report.min_dissipation.min(diss);
    }
    report.pass = !failed
        && report.samples_tested > 0
        && report.max_frame_invariance_residual_w <= tol
        && report.max_frame_invariance_residual_z <= tol
        && report.max_angular_momentum_residual <= tol
        && report.min_dissipation >= -tol;
    report
}
