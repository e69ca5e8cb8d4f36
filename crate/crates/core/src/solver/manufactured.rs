//! Manufactured solutions: a prescribed deformation is made exact by adding
//! the residual of the momentum balance as body force.

use crate::constitutive::{piola_stress, viscous_stress, ConstitutiveModel};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::grid::Grid;
use crate::solver::operators::{gradient_field, stress_divergence};
use crate::solver::stepper::{init_state, integrate, Forcing, SolverConfig, Termination};
use crate::tensor::SquareMatrix;

/// Step of the fourth-order central differences used for `div σ` in
/// [`ForcingMode::Continuous`].
pub const CONTINUOUS_DIV_STEP: f64 = 1e-3;

/// A smooth space-time deformation with clamped boundary values.
pub trait ExactSolution<T: Real> {
    fn dim(&self) -> usize;
    fn xi(&self, t: T, x: &[T], out: &mut [T]);
    fn xi_t(&self, t: T, x: &[T], out: &mut [T]);
    fn xi_tt(&self, t: T, x: &[T], out: &mut [T]);
    fn grad_xi(&self, t: T, x: &[T]) -> SquareMatrix<T>;
    fn grad_xi_t(&self, t: T, x: &[T]) -> SquareMatrix<T>;
}

/// `ξ*(t, X) = X + A e^{−t} s(X) e₁` with `s = sin(πx)` in 1D and
/// `s = sin(πx) sin(πy)` in 2D. `A = 0` is the rest state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayingMode<T> {
    pub dim: usize,
    pub amplitude: T,
}

impl<T: Real> DecayingMode<T> {
    pub const DEFAULT_AMPLITUDE: f64 = 0.01;

    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            amplitude: T::lit(Self::DEFAULT_AMPLITUDE),
        }
    }

    fn shape(&self, x: &[T]) -> (T, [T; 2]) {
        let pi = T::PI();
        let (sx, cx) = (pi * x[0]).sin_cos();
        if self.dim == 1 {
            (sx, [pi * cx, T::zero()])
        } else {
            let (sy, cy) = (pi * x[1]).sin_cos();
            (sx * sy, [pi * cx * sy, pi * sx * cy])
        }
    }

    fn weight(&self, t: T) -> T {
        self.amplitude * (-t).exp()
    }

    fn grad_shape(&self, x: &[T], factor: T) -> SquareMatrix<T> {
        let (_, g) = self.shape(x);
        SquareMatrix::from_fn(self.dim, |i, j| if i == 0 { factor * g[j] } else { T::zero() })
    }
}

impl<T: Real> ExactSolution<T> for DecayingMode<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn xi(&self, t: T, x: &[T], out: &mut [T]) {
        out.copy_from_slice(x);
        out[0] += self.weight(t) * self.shape(x).0;
    }

    fn xi_t(&self, t: T, x: &[T], out: &mut [T]) {
        out.fill(T::zero());
        out[0] = -self.weight(t) * self.shape(x).0;
    }

    fn xi_tt(&self, t: T, x: &[T], out: &mut [T]) {
        out.fill(T::zero());
        out[0] = self.weight(t) * self.shape(x).0;
    }

    fn grad_xi(&self, t: T, x: &[T]) -> SquareMatrix<T> {
        SquareMatrix::identity(self.dim) + self.grad_shape(x, self.weight(t))
    }

    fn grad_xi_t(&self, t: T, x: &[T]) -> SquareMatrix<T> {
        self.grad_shape(x, -self.weight(t))
    }
}

/// How `div σ(ξ*)` enters the forcing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForcingMode {
    /// The scheme's own gradient and divergence applied to the sampled exact
    /// fields. The sampled solution then solves the semi-discrete system
    /// exactly, so only the time-stepping error remains.
    Discrete,
    /// Pointwise `div σ` of the continuum fields. The error then carries the
    /// full spatial consistency error.
    Continuous,
}

/// Body force `ξ*_tt − div σ(∇ξ*, ∇ξ*_t)`.
pub struct ManufacturedForcing<'a, T, E: ?Sized> {
    pub model: &'a ConstitutiveModel<T>,
    pub exact: &'a E,
    pub mode: ForcingMode,
    /// Multiplies the divergence term; `1` is consistent, anything else is a
    /// deliberately broken stencil.
    pub divergence_scale: T,
}

impl<T: Real, E: ExactSolution<T> + ?Sized> ManufacturedForcing<'_, T, E> {
    fn stress(&self, f: &SquareMatrix<T>, q: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
        Ok(piola_stress(&self.model.energy, f)? + viscous_stress(&self.model.viscosity, f, q)?)
    }

    fn point_stress(&self, t: T, x: &[T]) -> Result<SquareMatrix<T>> {
        self.stress(&self.exact.grad_xi(t, x), &self.exact.grad_xi_t(t, x))
    }

    fn continuous_divergence(&self, t: T, x: &[T], out: &mut [T]) -> Result<()> {
        let d = self.exact.dim();
        let delta = T::lit(CONTINUOUS_DIV_STEP);
        let weights = [(T::lit(-2.0), T::one()), (-T::one(), T::lit(-8.0)), (T::one(), T::lit(8.0)), (T::lit(2.0), -T::one())];
        let denom = T::lit(12.0) * delta;
        out.fill(T::zero());
        let mut y = [T::zero(); 2];
        for j in 0..d {
            for &(offset, w) in &weights {
                y[..d].copy_from_slice(x);
                y[j] += offset * delta;
                let s = self.point_stress(t, &y[..d])?;
                for (c, o) in out.iter_mut().enumerate() {
                    *o += w * s[(c, j)] / denom;
                }
            }
        }
        Ok(())
    }

    pub fn try_nodal(&self, grid: &Grid<T>, t: T) -> Result<Vec<T>> {
        let d = grid.dim();
        let mut f = grid.sample(|x, out| self.exact.xi_tt(t, x, out));
        let div = match self.mode {
            ForcingMode::Discrete => {
                let xi = grid.sample(|x, out| self.exact.xi(t, x, out));
                let v = grid.sample(|x, out| self.exact.xi_t(t, x, out));
                let stresses = gradient_field(grid, &xi)
                    .iter()
                    .zip(gradient_field(grid, &v))
                    .map(|(f, q)| self.stress(f, &q))
                    .collect::<Result<Vec<_>>>()?;
                stress_divergence(grid, &stresses)
            }
            ForcingMode::Continuous => {
                let mut div = vec![T::zero(); grid.node_count() * d];
                for &node in grid.interior_nodes() {
                    let x = grid.node_coords(node);
                    self.continuous_divergence(t, &x[..d], &mut div[node * d..(node + 1) * d])?;
                }
                div
            }
        };
        for (fi, di) in f.iter_mut().zip(div) {
            *fi -= self.divergence_scale * di;
        }
        Ok(f)
    }
}

impl<T: Real, E: ExactSolution<T> + ?Sized> Forcing<T> for ManufacturedForcing<'_, T, E> {
    fn nodal(&self, grid: &Grid<T>, t: T) -> Vec<T> {
        self.try_nodal(grid, t)
            .unwrap_or_else(|_| vec![T::nan(); grid.node_count() * grid.dim()])
    }
}

/// Largest nodal errors of `ξ` against the exact solution over the run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedErrors<T> {
    /// `max_t (hⁿ Σ_nodes |ξ − ξ*|²)^{1/2}`
    pub l2: T,
    /// `max_t max_nodes |ξ − ξ*|`
    pub linf: T,
    pub steps: usize,
}

fn nodal_errors<T: Real>(grid: &Grid<T>, xi: &[T], exact: &[T]) -> (T, T) {
    let (sum, max) = xi
        .iter()
        .zip(exact)
        .fold((T::zero(), T::zero()), |(s, m), (&a, &b)| {
            let e = a - b;
            (s + e * e, m.max(e.abs()))
        });
    ((sum * grid.volume_weight()).sqrt(), max)
}

/// Runs the scheme with manufactured forcing from the exact initial data.
pub fn manufactured_run<T: Real, E: ExactSolution<T> + ?Sized>(
    model: &ConstitutiveModel<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig<T>,
    exact: &E,
    mode: ForcingMode,
) -> Result<ManufacturedErrors<T>> {
    let forcing = ManufacturedForcing {
        model,
        exact,
        mode,
        divergence_scale: T::one(),
    };
    manufactured_run_with(grid, cfg, &forcing)
}

pub fn manufactured_run_with<T: Real, E: ExactSolution<T> + ?Sized>(
    grid: &Grid<T>,
    cfg: &SolverConfig<T>,
    forcing: &ManufacturedForcing<'_, T, E>,
) -> Result<ManufacturedErrors<T>> {
    cfg.validate(grid.dim())?;
    if forcing.exact.dim() != grid.dim() {
        return Err(Error::DimensionMismatch(forcing.exact.dim(), grid.dim()));
    }
    let exact = forcing.exact;
    let zero = T::zero();
    let state0 = init_state(grid, |x, o| exact.xi(zero, x, o), |x, o| exact.xi_t(zero, x, o), cfg.det_floor)?;
    let mut errors = ManufacturedErrors {
        l2: zero,
        linf: zero,
        steps: 0,
    };
    let termination = integrate(forcing.model, grid, cfg, &state0, Some(forcing), |k, state, _| {
        let reference = grid.sample(|x, o| exact.xi(state.time, x, o));
        let (l2, linf) = nodal_errors(grid, &state.xi, &reference);
        // NaN must poison the maximum, not be skipped by it
        errors.l2 = if l2.is_finite() { errors.l2.max(l2) } else { T::nan() };
        errors.linf = if linf.is_finite() { errors.linf.max(linf) } else { T::nan() };
        errors.steps = k;
    });
    match termination {
        Termination::Completed => Ok(errors),
        Termination::DetFloorHit { time } => Err(Error::Breakdown {
            time: time.to_f64_lossy(),
        }),
        Termination::PicardDivergence { time } => Err(Error::PicardDivergence {
            time: time.to_f64_lossy(),
        }),
        Termination::LinearSolverFailure { time } => Err(Error::LinearSolveFailure {
            time: time.to_f64_lossy(),
            reason: "manufactured run".into(),
        }),
    }
}

/// `log₂(e_i / e_{i+1})` for a sequence of errors under successive halving.
pub fn observed_rates<T: Real>(errors: &[T]) -> Vec<T> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
