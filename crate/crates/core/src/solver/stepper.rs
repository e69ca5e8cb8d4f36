//! Semi-implicit time stepping: elasticity explicit, viscosity implicit with
//! the tangent `D_Q Z` frozen and refrozen by Picard iteration.

use crate::constitutive::{piola_stress, viscous_stress, viscous_tangent_q, ConstitutiveModel};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::grid::Grid;
use crate::solver::linear::{bicgstab, conjugate_gradient, dense_solve, to_dense, Shifted};
use crate::solver::operators::{
    assemble_viscous_operator, gradient_field, min_cell_det, stress_divergence, ViscousOperator,
};
use crate::tensor::{FourthOrderTensor, SquareMatrix};

/// Tolerated deviation of user-supplied boundary data from the clamped values.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Systems up to this size fall back to a dense direct solve when Krylov fails.
pub const DENSE_FALLBACK_LIMIT: usize = 2000;
/// Picard increments growing by more than this factor abort the step.
pub const PICARD_DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub picard_tol: T,
    pub picard_max: usize,
    pub det_floor: T,
    pub linear_tol: T,
    /// Integrability exponent of the solution class; must exceed `dim + 2`.
    pub p_norm: T,
    /// Keep every `save_every`-th step in the trajectory.
    pub save_every: usize,
}

impl<T: Real> SolverConfig<T> {
    /// Defaults for a grid of the given dimension (`p = dim + 3`).
    pub fn for_dim(dim: usize) -> Self {
        Self {
            dt: T::lit(1e-3),
            t_end: T::one(),
            picard_tol: T::lit(1e-10),
            picard_max: 5,
            det_floor: T::lit(1e-3),
            linear_tol: T::lit(1e-10),
            p_norm: T::from_count(dim + 3),
            save_every: 1,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.dt > T::zero()) {
            return bad("dt must be positive");
        }
        if !(self.t_end > T::zero()) {
            return bad("t_end must be positive");
        }
        if self.picard_max < 1 {
            return bad("picard_max must be at least 1");
        }
        if !(self.det_floor > T::zero()) {
            return bad("det_floor must be positive");
        }
        if !(self.linear_tol > T::zero()) || !(self.picard_tol >= T::zero()) {
            return bad("tolerances must be positive");
        }
        if !(self.p_norm > T::from_count(dim + 2)) {
            return bad("p_norm must exceed dim + 2");
        }
        if self.save_every < 1 {
            return bad("save_every must be at least 1");
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        let n = (self.t_end / self.dt).to_f64_lossy();
        (n - 1e-9).ceil().max(1.0) as usize
    }
}

/// Nodal deformation and velocity at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState<T> {
    pub time: T,
    pub xi: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> FieldState<T> {
    /// The undeformed body at rest.
    pub fn rest(grid: &Grid<T>) -> Self {
        Self {
            time: T::zero(),
            xi: grid.reference_positions(),
            v: vec![T::zero(); grid.node_count() * grid.dim()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination<T> {
    Completed,
    DetFloorHit { time: T },
    PicardDivergence { time: T },
    LinearSolverFailure { time: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub states: Vec<FieldState<T>>,
    pub termination: Termination<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.states.iter().map(|s| s.time).collect()
    }

    /// The prefix of snapshots with `time <= t_max`.
    pub fn truncated(&self, t_max: T) -> Self {
        let tol = t_max.abs() * T::lit(1e-12);
        Self {
            states: self.states.iter().filter(|s| s.time <= t_max + tol).cloned().collect(),
            termination: self.termination,
        }
    }
}

/// Body force sampled at nodes.
pub trait Forcing<T: Real> {
    /// Nodal force at time `t`; boundary entries are ignored.
    fn nodal(&self, grid: &Grid<T>, t: T) -> Vec<T>;
}

/// Adapts a pointwise `f(t, X, out)` into a [`Forcing`].
pub struct PointForcing<F>(pub F);

impl<T: Real, F: Fn(T, &[T], &mut [T])> Forcing<T> for PointForcing<F> {
    fn nodal(&self, grid: &Grid<T>, t: T) -> Vec<T> {
        grid.sample(|x, out| (self.0)(t, x, out))
    }
}

/// Samples initial data, clamps the boundary and checks `det ∇ξ0 > det_floor`.
pub fn init_state<T: Real>(
    grid: &Grid<T>,
    xi0: impl Fn(&[T], &mut [T]),
    xi1: impl Fn(&[T], &mut [T]),
    det_floor: T,
) -> Result<FieldState<T>> {
    let d = grid.dim();
    let mut xi = grid.sample(&xi0);
    let mut v = grid.sample(&xi1);
    let reference = grid.reference_positions();
    for node in grid.boundary_nodes() {
        for c in 0..d {
            let k = node * d + c;
            let dev = (xi[k] - reference[k]).abs().max(v[k].abs());
            if !(dev <= T::lit(BOUNDARY_TOL)) {
                return Err(Error::BoundaryMismatch {
                    node,
                    deviation: dev.to_f64_lossy(),
                });
            }
            xi[k] = reference[k];
            v[k] = T::zero();
        }
    }
    if xi.iter().chain(&v).any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig("initial data is not finite".into()));
    }
    let (det, cell) = min_cell_det(grid, &xi);
    if !(det > det_floor) {
        return Err(Error::Interpenetration {
            cell,
            det: det.to_f64_lossy(),
            floor: det_floor.to_f64_lossy(),
        });
    }
    Ok(FieldState {
        time: T::zero(),
        xi,
        v,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome<T> {
    pub state: FieldState<T>,
    pub picard_iterations: usize,
    /// `‖v^{k+1} − v^k‖_∞` per Picard iterate.
    pub increments: Vec<T>,
}

fn max_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

/// Solves `(I/dt + L) x = rhs` on the interior unknowns.
pub(crate) fn solve_shifted<T: Real>(
    op: &ViscousOperator<'_, T>,
    inv_dt: T,
    rhs: &[T],
    guess: &[T],
    tol: T,
    time: T,
) -> Result<Vec<T>> {
    let system = Shifted { shift: inv_dt, op };
    let n = rhs.len();
    let cap = (10 * n).max(1000);
    let mut x = guess.to_vec();
    let attempt = if op.is_symmetric() {
        conjugate_gradient(&system, rhs, &mut x, tol, cap)
    } else {
        bicgstab(&system, rhs, &mut x, tol, cap)
    };
    match attempt {
        Ok(_) => Ok(x),
        Err(reason) if n <= DENSE_FALLBACK_LIMIT => dense_solve(to_dense(&system), rhs.to_vec()).ok_or(
            Error::LinearSolveFailure {
                time: time.to_f64_lossy(),
                reason: format!("{reason}; dense fallback singular"),
            },
        ),
        Err(reason) => Err(Error::LinearSolveFailure {
            time: time.to_f64_lossy(),
            reason,
        }),
    }
}

/// One step without external forcing.
pub fn semi_implicit_step<T: Real>(
    state: &FieldState<T>,
    model: &ConstitutiveModel<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig<T>,
) -> Result<StepOutcome<T>> {
    step_with_forcing(state, model, grid, cfg, None)
}

/// One semi-implicit step. With `Fⁿ = ∇ξⁿ` and Picard iterates `v^k`
/// (starting from `vⁿ`), each iterate solves
///
/// `(v^{k+1} − vⁿ)/dt − div(M^k ∇v^{k+1}) = div DW(Fⁿ) + div(Z(Fⁿ, ∇v^k) − M^k ∇v^k) + f`
///
/// with `M^k = D_Q Z(Fⁿ, ∇v^k)`, until `‖v^{k+1} − v^k‖_∞ <= picard_tol` or
/// `picard_max` solves. Then `ξ^{n+1} = ξⁿ + dt v^{n+1}`.
pub fn step_with_forcing<T: Real>(
    state: &FieldState<T>,
    model: &ConstitutiveModel<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig<T>,
    forcing: Option<&[T]>,
) -> Result<StepOutcome<T>> {
    let time_next = state.time + cfg.dt;
    let inv_dt = T::one() / cfg.dt;

    let f_n = gradient_field(grid, &state.xi);
    if let Some((cell, f)) = f_n
        .iter()
        .enumerate()
        .find(|(_, f)| !(f.det() > cfg.det_floor))
    {
        return Err(Error::Interpenetration {
            cell,
            det: f.det().to_f64_lossy(),
            floor: cfg.det_floor.to_f64_lossy(),
        });
    }
    let elastic: Vec<SquareMatrix<T>> = f_n
        .iter()
        .map(|f| piola_stress(&model.energy, f))
        .collect::<Result<_>>()?;
    let mut base = stress_divergence(grid, &elastic);
    for (b, &v) in base.iter_mut().zip(&state.v) {
        *b += v * inv_dt;
    }
    if let Some(f) = forcing {
        for (b, &fi) in base.iter_mut().zip(f) {
            *b += fi;
        }
    }

    let linear = model.viscosity.is_linear_in_q();
    let mut v_k = grid.gather(&state.v);
    let mut increments = Vec::new();
    let mut iterations = 0;
    for k in 0..cfg.picard_max {
        let q_k = gradient_field(grid, &grid.scatter(&v_k));
        let mut frozen: Vec<FourthOrderTensor<T>> = Vec::with_capacity(q_k.len());
        let mut correction: Vec<SquareMatrix<T>> = Vec::with_capacity(q_k.len());
        for (f, q) in f_n.iter().zip(&q_k) {
            let m = viscous_tangent_q(&model.viscosity, f, q)?;
            if !linear {
                correction.push(viscous_stress(&model.viscosity, f, q)? - m.apply(q));
            }
            frozen.push(m);
        }
        let mut rhs_full = base.clone();
        if !linear {
            for (r, c) in rhs_full.iter_mut().zip(stress_divergence(grid, &correction)) {
                *r += c;
            }
        }
        let rhs = grid.gather(&rhs_full);
        let op = assemble_viscous_operator(grid, frozen);
        let v_next = solve_shifted(&op, inv_dt, &rhs, &v_k, cfg.linear_tol, time_next)?;
        let inc = max_abs_diff(&v_next, &v_k);
        iterations = k + 1;
        v_k = v_next;
        if !inc.is_finite() {
            return Err(Error::PicardDivergence {
                time: time_next.to_f64_lossy(),
            });
        }
        // the first increment is the physical change over the step, not a Picard correction
        if k >= 2 && inc > T::lit(PICARD_DIVERGENCE_FACTOR) * increments[k - 1] {
            return Err(Error::PicardDivergence {
                time: time_next.to_f64_lossy(),
            });
        }
        increments.push(inc);
        if inc <= cfg.picard_tol {
            break;
        }
    }

    let v_new = grid.scatter(&v_k);
    let xi_new: Vec<T> = state.xi.iter().zip(&v_new).map(|(&x, &v)| x + cfg.dt * v).collect();
    Ok(StepOutcome {
        state: FieldState {
            time: time_next,
            xi: xi_new,
            v: v_new,
        },
        picard_iterations: iterations,
        increments,
    })
}

/// Advances `state0` to `t_end`, observing every step. The observer receives
/// each new state; snapshots are not retained here.
pub(crate) fn integrate<T: Real>(
    model: &ConstitutiveModel<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig<T>,
    state0: &FieldState<T>,
    forcing: Option<&dyn Forcing<T>>,
    mut observe: impl FnMut(usize, &FieldState<T>, bool),
) -> Termination<T> {
    let steps = cfg.step_count();
    let (det0, _) = min_cell_det(grid, &state0.xi);
    if !(det0 > cfg.det_floor) {
        return Termination::DetFloorHit { time: state0.time };
    }
    let mut state = state0.clone();
    for k in 1..=steps {
        let t_next = state0.time + T::from_count(k) * cfg.dt;
        let nodal_force = forcing.map(|f| f.nodal(grid, t_next));
        let outcome = match step_with_forcing(&state, model, grid, cfg, nodal_force.as_deref()) {
            Ok(o) => o,
            Err(Error::Interpenetration { .. }) | Err(Error::DomainError(_)) => {
                return Termination::DetFloorHit { time: state.time }
            }
            Err(Error::PicardDivergence { .. }) => return Termination::PicardDivergence { time: t_next },
            Err(_) => return Termination::LinearSolverFailure { time: t_next },
        };
        state = outcome.state;
        state.time = t_next;
        let (det, _) = min_cell_det(grid, &state.xi);
        if !(det > cfg.det_floor) {
            observe(k, &state, true);
            return Termination::DetFloorHit { time: t_next };
        }
        if state.xi.iter().chain(&state.v).any(|x| !x.is_finite()) {
            return Termination::PicardDivergence { time: t_next };
        }
        observe(k, &state, k % cfg.save_every == 0 || k == steps);
    }
    Termination::Completed
}

/// Runs the scheme from `state0` until `t_end` or breakdown. Breakdown is
/// reported through [`Trajectory::termination`], never as an error.
pub fn run<T: Real>(
    model: &ConstitutiveModel<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig<T>,
    state0: &FieldState<T>,
    forcing: Option<&dyn Forcing<T>>,
) -> Trajectory<T> {
    let mut states = vec![state0.clone()];
    let termination = integrate(model, grid, cfg, state0, forcing, |_, s, keep| {
        if keep {
            states.push(s.clone());
        }
    });
    Trajectory { states, termination }
}

/// Heat-equation extension of the initial data: `ū₁` solves `u_t = Δu` with
/// zero boundary values and `ū₁(0) = ξ₁` (implicit Euler), and
/// `ξ̄(t) = ξ₀ + ∫₀ᵗ ū₁` (trapezoidal rule). The returned trajectory stores
/// `ξ̄` in `xi` and `ξ̄_t = ū₁` in `v` at every step.
pub fn heat_extension<T: Real>(
    grid: &Grid<T>,
    xi0: &[T],
    xi1: &[T],
    dt: T,
    t_end: T,
) -> Result<Trajectory<T>> {
    let d = grid.dim();
    for node in grid.boundary_nodes() {
        for c in 0..d {
            let dev = xi1[node * d + c].abs();
            if !(dev <= T::lit(BOUNDARY_TOL)) {
                return Err(Error::BoundaryMismatch {
                    node,
                    deviation: dev.to_f64_lossy(),
                });
            }
        }
    }
    let laplacian = assemble_viscous_operator(grid, vec![FourthOrderTensor::identity(d); grid.cell_count()]);
    let cfg = SolverConfig::<T> {
        dt,
        t_end,
        ..SolverConfig::for_dim(d)
    };
    let inv_dt = T::one() / dt;
    let half_dt = T::lit(0.5) * dt;
    let mut u = grid.gather(xi1);
    let mut xi_bar = xi0.to_vec();
    let mut states = vec![FieldState {
        time: T::zero(),
        xi: xi_bar.clone(),
        v: grid.scatter(&u),
    }];
    for k in 1..=cfg.step_count() {
        let t = T::from_count(k) * dt;
        let rhs: Vec<T> = u.iter().map(|&x| x * inv_dt).collect();
        let u_next = solve_shifted(&laplacian, inv_dt, &rhs, &u, cfg.linear_tol, t)?;
        let increment = grid.scatter(
            &u.iter()
                .zip(&u_next)
                .map(|(&a, &b)| half_dt * (a + b))
                .collect::<Vec<_>>(),
        );
        for (x, inc) in xi_bar.iter_mut().zip(increment) {
            *x += inc;
        }
        u = u_next;
        states.push(FieldState {
            time: t,
            xi: xi_bar.clone(),
            v: grid.scatter(&u),
        });
    }
    Ok(Trajectory {
        states,
        termination: Termination::Completed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{EnergyModel, ViscosityModel};
    use std::f64::consts::PI;

    fn w0_z0pp() -> ConstitutiveModel<f64> {
        ConstitutiveModel::new(EnergyModel::W0, ViscosityModel::Z0DoublePrime).unwrap()
    }

    #[test]
    fn init_state_examples() {
        let g = Grid::<f64>::new(2, 8).unwrap();
        let s = init_state(&g, |x, o| o.copy_from_slice(x), |_, o| o.fill(0.0), 1e-3).unwrap();
        assert_eq!(s, FieldState::rest(&g));
        let s = init_state(
            &g,
            |x, o| {
                o[0] = x[0] + 0.01 * (PI * x[0]).sin() * (PI * x[1]).sin();
                o[1] = x[1];
            },
            |_, o| o.fill(0.0),
            1e-3,
        )
        .unwrap();
        assert!(min_cell_det(&g, &s.xi).0 > 0.9);
        let fold = init_state(
            &g,
            |x, o| {
                o[0] = x[0] - 0.5 * (PI * x[0]).sin() * (PI * x[1]).sin();
                o[1] = x[1];
            },
            |_, o| o.fill(0.0),
            1e-3,
        );
        assert!(matches!(fold, Err(Error::Interpenetration { .. })));
        let shifted = init_state(&g, |x, o| o.copy_from_slice(&[x[0] + 0.1, x[1]]), |_, o| o.fill(0.0), 1e-3);
        assert!(matches!(shifted, Err(Error::BoundaryMismatch { .. })));
    }

    #[test]
    fn rest_state_is_a_fixed_point_for_every_model() {
        let models = [
            ViscosityModel::Z0DoublePrime,
            ViscosityModel::Z0Prime,
            ViscosityModel::Zm { m: 0 },
            ViscosityModel::Zm { m: 1 },
            ViscosityModel::Zm { m: 2 },
        ];
        for dim in 1..=2 {
            let g = Grid::<f64>::new(dim, 6).unwrap();
            let cfg = SolverConfig::for_dim(dim);
            for energy in [EnergyModel::W0, EnergyModel::W1 { q: 2.0 }, EnergyModel::W2 { q: 2.0 }] {
                for visc in models {
                    let model = ConstitutiveModel::new(energy, visc).unwrap();
                    let rest = FieldState::rest(&g);
                    let out = semi_implicit_step(&rest, &model, &g, &cfg).unwrap();
                    assert!((out.state.time - cfg.dt).abs() < 1e-15);
                    assert!(max_abs_diff(&out.state.xi, &rest.xi) <= 1e-12, "{energy:?} {visc:?}");
                    assert!(out.state.v.iter().all(|v| v.abs() <= 1e-12));
                }
            }
        }
    }

    #[test]
    fn linear_models_converge_in_one_picard_step() {
        let g = Grid::<f64>::new(2, 6).unwrap();
        let state = init_state(
            &g,
            |x, o| o.copy_from_slice(x),
            |x, o| {
                o[0] = 0.1 * (PI * x[0]).sin() * (PI * x[1]).sin();
                o[1] = -0.05 * (2.0 * PI * x[0]).sin() * (PI * x[1]).sin();
            },
            1e-3,
        )
        .unwrap();
        let cfg = SolverConfig {
            picard_tol: 0.0,
            picard_max: 3,
            ..SolverConfig::for_dim(2)
        };
        for visc in [ViscosityModel::Z0DoublePrime, ViscosityModel::Z0Prime, ViscosityModel::Zm { m: 0 }] {
            let model = ConstitutiveModel::new(EnergyModel::W0, visc).unwrap();
            let out = semi_implicit_step(&state, &model, &g, &cfg).unwrap();
            assert!(out.increments.len() >= 2);
            assert!(out.increments[1] <= 1e-9, "{:?}", out.increments);
        }
    }

    #[test]
    fn nonlinear_model_picard_contracts() {
        let g = Grid::<f64>::new(1, 16).unwrap();
        let state = init_state(
            &g,
            |x, o| o[0] = x[0],
            |x, o| o[0] = 0.5 * (PI * x[0]).sin(),
            1e-3,
        )
        .unwrap();
        let model = ConstitutiveModel::new(EnergyModel::W0, ViscosityModel::Zm { m: 1 }).unwrap();
        let cfg = SolverConfig {
            picard_tol: 1e-12,
            picard_max: 30,
            ..SolverConfig::for_dim(1)
        };
        let out = semi_implicit_step(&state, &model, &g, &cfg).unwrap();
        assert!(*out.increments.last().unwrap() <= 1e-12, "{:?}", out.increments);
    }

    #[test]
    fn matches_hand_assembled_dense_solve() {
        // 1D, 5 nodes, W0 + Z0″, one step from v = sin(πx), ξ = X.
        let g = Grid::<f64>::new(1, 4).unwrap();
        let state = init_state(&g, |x, o| o[0] = x[0], |x, o| o[0] = (PI * x[0]).sin(), 1e-3).unwrap();
        let cfg = SolverConfig {
            dt: 0.01,
            picard_max: 1,
            ..SolverConfig::for_dim(1)
        };
        let out = semi_implicit_step(&state, &w0_z0pp(), &g, &cfg).unwrap();
        // at F = 1 the tangent is Q ↦ 2Q, DW(1) = 0: (I/dt + 2 K) v = v⁰/dt, K = tridiag(-1, 2, -1)/h²
        let h = 0.25;
        let k = 2.0 / (h * h);
        let a = vec![
            vec![1.0 / cfg.dt + 2.0 * k, -k, 0.0],
            vec![-k, 1.0 / cfg.dt + 2.0 * k, -k],
            vec![0.0, -k, 1.0 / cfg.dt + 2.0 * k],
        ];
        let b: Vec<f64> = (1..4).map(|i| (PI * i as f64 * h).sin() / cfg.dt).collect();
        let expect = dense_solve(a, b).unwrap();
        for i in 0..3 {
            assert!((out.state.v[i + 1] - expect[i]).abs() < 1e-9);
            assert!((out.state.xi[i + 1] - ((i + 1) as f64 * h + cfg.dt * expect[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn clamping_is_bitwise_preserved() {
        let g = Grid::<f64>::new(2, 6).unwrap();
        let state = init_state(
            &g,
            |x, o| o.copy_from_slice(x),
            |x, o| {
                o[0] = 0.3 * (PI * x[0]).sin() * (PI * x[1]).sin();
                o[1] = 0.0;
            },
            1e-3,
        )
        .unwrap();
        let cfg = SolverConfig {
            t_end: 0.02,
            ..SolverConfig::for_dim(2)
        };
        let traj = run(&w0_z0pp(), &g, &cfg, &state, None);
        assert_eq!(traj.termination, Termination::Completed);
        let reference = g.reference_positions();
        for s in &traj.states {
            for node in g.boundary_nodes() {
                for c in 0..2 {
                    assert_eq!(s.xi[node * 2 + c], reference[node * 2 + c]);
                    assert_eq!(s.v[node * 2 + c], 0.0);
                }
            }
        }
    }

    #[test]
    fn heat_extension_examples() {
        let g = Grid::<f64>::new(1, 32).unwrap();
        let xi0 = g.reference_positions();
        let still = heat_extension(&g, &xi0, &vec![0.0; 33], 0.01, 0.1).unwrap();
        assert!(still.states.iter().all(|s| s.xi == xi0));

        let xi1 = g.sample(|x, o| o[0] = (PI * x[0]).sin());
        let dt = 1e-4;
        let ext = heat_extension(&g, &xi0, &xi1, dt, 0.05).unwrap();
        let last = ext.states.last().unwrap();
        let mid = 16;
        let exact = (-PI * PI * last.time).exp();
        assert!((last.v[mid] - exact).abs() < 5e-3, "{} vs {exact}", last.v[mid]);
        for s in &ext.states {
            assert_eq!(s.xi[0], 0.0);
            assert_eq!(s.xi[32], 1.0);
        }
        assert!(matches!(
            heat_extension(&g, &xi0, &vec![1.0; 33], 0.01, 0.1),
            Err(Error::BoundaryMismatch { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::<f64>::for_dim(2).validate(2).is_ok());
        let cfg = SolverConfig {
            p_norm: 4.0,
            ..SolverConfig::<f64>::for_dim(2)
        };
        assert!(cfg.validate(2).is_err());
        assert!(cfg.validate(1).is_ok());
        assert_eq!(SolverConfig::<f64> { t_end: 1.0, dt: 1e-3, ..SolverConfig::for_dim(1) }.step_count(), 1000);
    }
}
