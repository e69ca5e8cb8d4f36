//! Monitors along a trajectory: energy balance, minimum Jacobian, and the
//! distance of the solution from its heat-equation extension.

use crate::constitutive::{dissipation_density, energy, ConstitutiveModel};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::grid::Grid;
use crate::solver::operators::{gradient_field, min_cell_det};
use crate::solver::stepper::{FieldState, Forcing, Trajectory};

/// Time series of the energy budget. `residual = E(t) + dissipated(t) − E(0) − forcing_work(t)`
/// with `E = kinetic + elastic`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyReport<T> {
    pub times: Vec<T>,
    pub kinetic: Vec<T>,
    pub elastic: Vec<T>,
    pub dissipated: Vec<T>,
    pub forcing_work: Vec<T>,
    pub residual: Vec<T>,
}

impl<T: Real> EnergyReport<T> {
    pub fn total(&self, k: usize) -> T {
        self.kinetic[k] + self.elastic[k]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn kinetic<T: Real>(grid: &Grid<T>, v: &[T]) -> T {
    T::lit(0.5) * grid.volume_weight() * v.iter().map(|&x| x * x).sum::<T>()
}

/// Returns `(∫W(∇ξ), ∫Z(∇ξ,∇v):∇v)` by the cell midpoint rule.
fn cell_integrals<T: Real>(model: &ConstitutiveModel<T>, grid: &Grid<T>, s: &FieldState<T>) -> Result<(T, T)> {
    let w = grid.volume_weight();
    let mut elastic = T::zero();
    let mut dissipation = T::zero();
    for (f, q) in gradient_field(grid, &s.xi).iter().zip(gradient_field(grid, &s.v)) {
        elastic += energy(&model.energy, f);
        dissipation += dissipation_density(&model.viscosity, f, &q)?;
    }
    Ok((w * elastic, w * dissipation))
}

/// Energy budget over the stored snapshots. Time integrals use the
/// trapezoidal rule between consecutive snapshots.
pub fn energy_report<T: Real>(
    traj: &Trajectory<T>,
    model: &ConstitutiveModel<T>,
    grid: &Grid<T>,
    forcing: Option<&dyn Forcing<T>>,
) -> Result<EnergyReport<T>> {
    let mut report = EnergyReport::default();
    let half = T::lit(0.5);
    let mut prev: Option<(T, T, T)> = None;
    let (mut dissipated, mut work) = (T::zero(), T::zero());
    for s in &traj.states {
        let (elastic, rate) = cell_integrals(model, grid, s)?;
        let power = match forcing {
            Some(f) => grid.volume_weight() * f.nodal(grid, s.time).iter().zip(&s.v).map(|(&a, &b)| a * b).sum::<T>(),
            None => T::zero(),
        };
        if let Some((t0, rate0, power0)) = prev {
            let dt = s.time - t0;
            dissipated += half * dt * (rate0 + rate);
            work += half * dt * (power0 + power);
        }
        prev = Some((s.time, rate, power));
        let kin = kinetic(grid, &s.v);
        report.times.push(s.time);
        report.kinetic.push(kin);
        report.elastic.push(elastic);
        report.dissipated.push(dissipated);
        report.forcing_work.push(work);
    }
    if let Some(&e0) = report.kinetic.first() {
        let e0 = e0 + report.elastic[0];
        report.residual = (0..report.len())
            .map(|k| report.total(k) + report.dissipated[k] - e0 - report.forcing_work[k])
            .collect();
    }
    Ok(report)
}

/// `(time, min over cells of det ∇ξ)` per snapshot.
pub fn min_det_series<T: Real>(traj: &Trajectory<T>, grid: &Grid<T>) -> Vec<(T, T)> {
    traj.states.iter().map(|s| (s.time, min_cell_det(grid, &s.xi).0)).collect()
}

/// `Θ(T) = ‖(ξ−ξ̄)_tt‖_p + ‖∇²(ξ−ξ̄)_t‖_p` and `D(T) = ‖ξ̄_tt‖_p + ‖∇²ξ̄_t‖_p`
/// over `Ω × (0, T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaReport<T> {
    pub t_final: T,
    pub theta: T,
    pub d_of_t: T,
    pub p: T,
}

/// Frobenius norm of the discrete Hessian of every component at an interior node.
fn hessian_norm<T: Real>(grid: &Grid<T>, w: &[T], node: usize) -> T {
    let d = grid.dim();
    let h2 = grid.spacing() * grid.spacing();
    let p = grid.nodes_per_side();
    let at = |n: usize, c: usize| w[n * d + c];
    let mut sum = T::zero();
    for c in 0..d {
        let centre = T::lit(2.0) * at(node, c);
        let xx = (at(node + 1, c) - centre + at(node - 1, c)) / h2;
        sum += xx * xx;
        if d == 2 {
            let yy = (at(node + p, c) - centre + at(node - p, c)) / h2;
            let xy = (at(node + p + 1, c) - at(node + p - 1, c) - at(node - p + 1, c) + at(node - p - 1, c))
                / (T::lit(4.0) * h2);
            sum += yy * yy + T::lit(2.0) * xy * xy;
        }
    }
    sum.sqrt()
}

/// Space-time `L_p` norms of `(a_tt, ∇²b)` where `a` and `b` are nodal
/// series. Second time differences exist only at interior snapshots, so the
/// first and last snapshot are dropped from both terms.
fn lp_pair<T: Real>(grid: &Grid<T>, times: &[T], a: &[Vec<T>], b: &[Vec<T>], p: T) -> T {
    if times.len() < 3 {
        return T::zero();
    }
    let d = grid.dim();
    let w = grid.volume_weight();
    let (mut acc_tt, mut acc_xx) = (T::zero(), T::zero());
    for k in 1..times.len() - 1 {
        let dt_minus = times[k] - times[k - 1];
        let dt_plus = times[k + 1] - times[k];
        let weight = w * T::lit(0.5) * (dt_minus + dt_plus);
        for node in 0..grid.node_count() {
            let mut s = T::zero();
            for c in 0..d {
                let i = node * d + c;
                let second = T::lit(2.0)
                    * ((a[k + 1][i] - a[k][i]) / dt_plus - (a[k][i] - a[k - 1][i]) / dt_minus)
                    / (dt_minus + dt_plus);
                s += second * second;
            }
            acc_tt += weight * s.sqrt().powf(p);
        }
        for &node in grid.interior_nodes() {
            acc_xx += weight * hessian_norm(grid, &b[k], node).powf(p);
        }
    }
    let inv = T::one() / p;
    acc_tt.powf(inv) + acc_xx.powf(inv)
}

/// Θ and D of `traj` relative to the heat extension `extension`; both must be
/// sampled at the same times.
pub fn theta_norm<T: Real>(grid: &Grid<T>, traj: &Trajectory<T>, extension: &Trajectory<T>, p: T) -> Result<ThetaReport<T>> {
    if !(p > T::from_count(grid.dim() + 2)) {
        return Err(Error::InvalidConfig(format!(
            "p = {} must exceed dim + 2",
            p.to_f64_lossy()
        )));
    }
    let (ts, te) = (traj.times(), extension.times());
    let tol = T::lit(1e-9);
    if ts.len() != te.len() || ts.iter().zip(&te).any(|(a, b)| (*a - *b).abs() > tol * (T::one() + a.abs())) {
        return Err(Error::MismatchedSampling(format!(
            "trajectory has {} snapshots, extension has {}",
            ts.len(),
            te.len()
        )));
    }
    let diff_xi: Vec<Vec<T>> = traj
        .states
        .iter()
        .zip(&extension.states)
        .map(|(s, e)| s.xi.iter().zip(&e.xi).map(|(&a, &b)| a - b).collect())
        .collect();
    let diff_v: Vec<Vec<T>> = traj
        .states
        .iter()
        .zip(&extension.states)
        .map(|(s, e)| s.v.iter().zip(&e.v).map(|(&a, &b)| a - b).collect())
        .collect();
    let ext_xi: Vec<Vec<T>> = extension.states.iter().map(|s| s.xi.clone()).collect();
    let ext_v: Vec<Vec<T>> = extension.states.iter().map(|s| s.v.clone()).collect();
    Ok(ThetaReport {
        t_final: ts.last().copied().unwrap_or_else(T::zero),
        theta: lp_pair(grid, &ts, &diff_xi, &diff_v, p),
        d_of_t: lp_pair(grid, &te, &ext_xi, &ext_v, p),
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{EnergyModel, ViscosityModel};
    use crate::solver::stepper::{heat_extension, init_state, run, SolverConfig, Termination};
    use std::f64::consts::PI;

    fn model() -> ConstitutiveModel<f64> {
        ConstitutiveModel::new(EnergyModel::W0, ViscosityModel::Z0DoublePrime).unwrap()
    }

    fn decay_run(grid: &Grid<f64>, dt: f64, t_end: f64) -> Trajectory<f64> {
        let state = init_state(
            grid,
            |x, o| o.copy_from_slice(x),
            |x, o| {
                o.fill(0.0);
                o[0] = 0.1 * (PI * x[0]).sin() * if x.len() == 2 { (PI * x[1]).sin() } else { 1.0 };
            },
            1e-3,
        )
        .unwrap();
        let cfg = SolverConfig {
            dt,
            t_end,
            ..SolverConfig::for_dim(grid.dim())
        };
        run(&model(), grid, &cfg, &state, None)
    }

    #[test]
    fn rest_trajectory_has_flat_budget() {
        let g = Grid::<f64>::new(2, 6).unwrap();
        let traj = Trajectory {
            states: vec![FieldState::rest(&g); 4],
            termination: Termination::Completed,
        };
        let r = energy_report(&traj, &model(), &g, None).unwrap();
        assert!(r.kinetic.iter().chain(&r.elastic).chain(&r.dissipated).chain(&r.residual).all(|x| x.abs() < 1e-14));
        assert!(min_det_series(&traj, &g).iter().all(|(_, d)| (d - 1.0).abs() < 1e-14));
    }

    #[test]
    fn decay_run_dissipates() {
        let g = Grid::new(1, 32).unwrap();
        let traj = decay_run(&g, 1e-3, 0.3);
        let r = energy_report(&traj, &model(), &g, None).unwrap();
        for k in 1..r.len() {
            assert!(r.total(k) < r.total(k - 1));
            assert!(r.dissipated[k] > r.dissipated[k - 1]);
        }
        assert!(r.residual.last().unwrap().abs() < 1e-2 * r.total(0));
    }

    #[test]
    fn uniform_compression_determinant() {
        let g = Grid::<f64>::new(2, 4).unwrap();
        let eps = 0.5;
        let states = [0.0, 0.2, 0.4]
            .iter()
            .map(|&t| FieldState {
                time: t,
                xi: g.sample(|x, o| {
                    o[0] = (1.0 - eps * t) * x[0];
                    o[1] = (1.0 - eps * t) * x[1];
                }),
                v: vec![0.0; g.node_count() * 2],
            })
            .collect();
        let traj = Trajectory {
            states,
            termination: Termination::Completed,
        };
        for (t, det) in min_det_series(&traj, &g) {
            assert!((det - (1.0 - eps * t).powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn theta_vanishes_on_the_extension_itself() {
        let g = Grid::new(1, 16).unwrap();
        let traj = decay_run(&g, 1e-2, 0.2);
        let s0 = &traj.states[0];
        let ext = heat_extension(&g, &s0.xi, &s0.v, 1e-2, 0.2).unwrap();
        let r = theta_norm(&g, &ext, &ext, 4.0).unwrap();
        assert_eq!(r.theta, 0.0);
        assert!(r.d_of_t > 0.0);
        let full = theta_norm(&g, &traj, &ext, 4.0).unwrap();
        assert!(full.theta > 0.0);
        let shorter = theta_norm(&g, &traj.truncated(0.1), &ext.truncated(0.1), 4.0).unwrap();
        assert!(shorter.theta <= full.theta && shorter.d_of_t <= full.d_of_t);
        assert!(matches!(
            theta_norm(&g, &traj.truncated(0.1), &ext, 4.0),
            Err(Error::MismatchedSampling(_))
        ));
        assert!(theta_norm(&g, &traj, &ext, 3.0).is_err());
    }

    #[test]
    fn hessian_of_quadratic_is_exact() {
        let g = Grid::<f64>::new(2, 6).unwrap();
        let w = g.sample(|x, o| {
            o[0] = x[0] * x[0];
            o[1] = x[0] * x[1];
        });
        for &node in g.interior_nodes() {
            // entries: ∂xx w₀ = 2, ∂xy w₁ = 1 counted twice
            assert!((hessian_norm(&g, &w, node) - 6f64.sqrt()).abs() < 1e-9);
        }
    }
}
