use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::constitutive::viscous_tangent_q;
use crate::diagnostics::{energy_report, min_det_series};
use crate::error::{Error, Result};
use crate::harness::config::{Command, Preset, RunSpec, Stencil, Tangent};
use crate::harness::output::{diagnostics_csv, fmt_real, vtk_snapshot, write_file, Report};
use crate::solver::grid::Grid;
use crate::solver::manufactured::{
    manufactured_run_with, observed_rates, DecayingMode, ForcingMode, ManufacturedForcing,
};
use crate::solver::operators::gradient_field;
use crate::solver::stepper::{init_state, run, FieldState, SolverConfig, Termination};
use crate::tensor::{FourthOrderTensor, SquareMatrix};
use crate::wellposedness::{
    check_initial_data, closed_form_gamma, fourier_korn_sample, rank_one_min, sector_scan, DEFAULT_REFINE_ITERS,
};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    CheckFailed = 1,
    InputError = 2,
    Breakdown = 3,
    SolverFailure = 4,
    ConvergenceFailure = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl From<&Error> for ExitStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Breakdown { .. } => ExitStatus::Breakdown,
            Error::PicardDivergence { .. } | Error::LinearSolveFailure { .. } => ExitStatus::SolverFailure,
            _ => ExitStatus::InputError,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutcome {
    pub status: ExitStatus,
    pub report: Report,
    /// Human-readable reason for a nonzero status.
    pub message: Option<String>,
}

impl CommandOutcome {
    fn failed(status: ExitStatus, report: Report, message: impl Into<String>) -> Self {
        Self {
            status,
            report,
            message: Some(message.into()),
        }
    }
}

/// Runs `spec.command`, writing its files into `out_dir`. Every failure is
/// folded into the returned status.
pub fn execute(spec: &RunSpec, out_dir: &Path) -> CommandOutcome {
    let result = spec.validate().and_then(|_| match spec.command {
        Command::Check => cmd_check(spec),
        Command::Korn => cmd_korn(spec),
        Command::Simulate => cmd_simulate(spec, out_dir),
        Command::Convergence => cmd_convergence(spec, out_dir),
    });
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let mut report = Report::default();
            report.put("command", spec.command);
            report.put("status", ExitStatus::from(&e).code());
            report.put("error", &e);
            return finish(CommandOutcome::failed(ExitStatus::from(&e), report, e.to_string()), out_dir);
        }
    };
    finish(outcome, out_dir)
}

fn finish(mut outcome: CommandOutcome, out_dir: &Path) -> CommandOutcome {
    if outcome.report.get("status").is_none() {
        outcome.report.put("status", outcome.status.code());
    }
    if let Err(e) = write_file(out_dir, "report.txt", &outcome.report.render()) {
        outcome.status = ExitStatus::InputError;
        outcome.message = Some(e.to_string());
    }
    outcome
}

fn shape(dim: usize, k: f64, x: &[f64]) -> f64 {
    let s = (k * PI * x[0]).sin();
    if dim == 2 {
        s * (PI * x[1]).sin()
    } else {
        s
    }
}

/// Samples the preset and checks admissibility.
pub fn preset_state(spec: &RunSpec, grid: &Grid<f64>) -> Result<FieldState<f64>> {
    let dim = grid.dim();
    let xi0 = |x: &[f64], o: &mut [f64]| {
        o.copy_from_slice(x);
        if spec.preset == Preset::Fold {
            o[0] -= 0.5 * shape(dim, 1.0, x);
        }
    };
    let xi1 = |x: &[f64], o: &mut [f64]| {
        o.fill(0.0);
        o[0] = match spec.preset {
            Preset::Rest | Preset::Fold => 0.0,
            Preset::Sinusoidal => spec.amplitude * shape(dim, spec.mode as f64, x),
            // converges on the centre line x = 1/2
            Preset::Compression => spec.rate * shape(dim, 2.0, x),
        };
    };
    init_state(grid, xi0, xi1, spec.det_floor)
}

fn model_line(spec: &RunSpec) -> String {
    format!("{} + {}", spec.energy, spec.viscosity_model().name())
}

pub fn cmd_check(spec: &RunSpec) -> Result<CommandOutcome> {
    let grid = Grid::new(spec.dim, spec.cells)?;
    let state = preset_state(spec, &grid)?;
    let visc = spec.viscosity_model();
    let f0 = gradient_field(&grid, &state.xi);
    let q0 = gradient_field(&grid, &state.v);
    let uniform = check_initial_data(&visc, &f0, &q0, spec.resolution)?;
    let worst = uniform.worst_node;
    let tangent = viscous_tangent_q(&visc, &f0[worst], &q0[worst])?;
    let spectrum = sector_scan(&tangent, spec.resolution);

    let mut closed_sup = f64::NEG_INFINITY;
    let mut closed_err = None;
    for (cell, (f, q)) in f0.iter().zip(&q0).enumerate() {
        match closed_form_gamma(&visc, f, q) {
            Ok(g) => closed_sup = closed_sup.max(g),
            Err(e) => {
                closed_err = Some(format!("cell {cell}: {e}"));
                break;
            }
        }
    }

    let bound = 1.0 / uniform.gamma_sup - 1e-6;
    let pass = uniform.pass && spectrum.elliptic;
    let mut report = Report::default();
    report.put("command", "check");
    report.put("model", model_line(spec));
    report.put("preset", spec.preset);
    report.put("cells_checked", f0.len());
    report.real("gamma_sup", uniform.gamma_sup);
    report.real("gamma_inf", uniform.gamma_inf);
    report.put("worst_cell", worst);
    match &closed_err {
        Some(e) => report.put("closed_form_gamma_sup", format!("undefined ({e})")),
        None => report.real("closed_form_gamma_sup", closed_sup),
    }
    report.real("sector_min_real_part", spectrum.min_real_part);
    report.real("sector_max_abs_arg", spectrum.max_abs_arg);
    report.put("sector_directions", spectrum.directions_scanned);
    report.put("elliptic", spectrum.elliptic);
    report.put("sector_bound_holds", spectrum.min_real_part >= bound);
    report.put("pass", pass);
    Ok(if pass {
        CommandOutcome {
            status: ExitStatus::Ok,
            report,
            message: None,
        }
    } else {
        let why = closed_err.unwrap_or_else(|| "rank-one constant not finite or sector not elliptic".into());
        CommandOutcome::failed(ExitStatus::CheckFailed, report, why)
    })
}

fn matrix_or(dim: usize, entries: &Option<Vec<f64>>, fallback: SquareMatrix<f64>) -> SquareMatrix<f64> {
    entries
        .as_deref()
        .map_or(fallback, |e| SquareMatrix::from_row_slice(dim, e))
}

pub fn cmd_korn(spec: &RunSpec) -> Result<CommandOutcome> {
    let n = spec.dim;
    let f0 = matrix_or(n, &spec.f0, SquareMatrix::identity(n));
    let q0 = matrix_or(n, &spec.q0, SquareMatrix::zeros(n));
    if !(f0.det() > 0.0) {
        return Err(Error::DomainError(format!("det F0 = {} is not positive", f0.det())));
    }
    let visc = spec.viscosity_model();
    let tangent = match spec.tangent {
        Tangent::Model => viscous_tangent_q(&visc, &f0, &q0)?,
        Tangent::Identity => FourthOrderTensor::identity(n),
        Tangent::NegIdentity => FourthOrderTensor::identity(n).scaled(-1.0),
        Tangent::Sym => FourthOrderTensor::sym_map(n),
        Tangent::TwoSym => FourthOrderTensor::sym_map(n).scaled(2.0),
    };
    let r = rank_one_min(&tangent, spec.resolution, DEFAULT_REFINE_ITERS);
    let spectrum = sector_scan(&tangent, spec.resolution);
    let worst_field = fourier_korn_sample(&tangent, spec.fields, spec.max_modes, spec.seed);

    let mut report = Report::default();
    report.put("command", "korn");
    report.put("tangent", spec.tangent);
    if spec.tangent == Tangent::Model {
        report.put("model", visc.name());
    }
    report.put("dim", n);
    report.real("ratio_min", r.ratio_min);
    report.real("gamma_est", r.gamma_est);
    let fmt_vec = |v: &crate::tensor::Vector<f64>| v.as_slice().iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(" ");
    report.put("a_star", fmt_vec(&r.a_star));
    report.put("b_star", fmt_vec(&r.b_star));
    if spec.tangent == Tangent::Model {
        match closed_form_gamma(&visc, &f0, &q0) {
            Ok(c) => {
                report.real("closed_form_gamma", c);
                let holds = r.gamma_est <= c * 1.001;
                report.put("closed_form_bound_holds", holds);
                // a closed form below the optimal constant cannot be a valid Korn constant
                report.put("closed_form_discrepancy", !holds);
            }
            Err(e) => report.put("closed_form_gamma", format!("undefined ({e})")),
        }
    }
    report.real("sector_min_real_part", spectrum.min_real_part);
    report.real("sector_max_abs_arg", spectrum.max_abs_arg);
    report.put("sector_directions", spectrum.directions_scanned);
    report.put("elliptic", spectrum.elliptic);
    report.real("fourier_worst_ratio", worst_field);
    report.put("fourier_fields", spec.fields);
    let pass = r.gamma_est.is_finite() && spectrum.elliptic;
    report.put("pass", pass);
    Ok(if pass {
        CommandOutcome {
            status: ExitStatus::Ok,
            report,
            message: None,
        }
    } else {
        CommandOutcome::failed(ExitStatus::CheckFailed, report, "gamma not finite or sector not elliptic")
    })
}

pub fn cmd_simulate(spec: &RunSpec, out_dir: &Path) -> Result<CommandOutcome> {
    let model = spec.model()?;
    let grid = Grid::new(spec.dim, spec.cells)?;
    // every step feeds the energy quadrature; `save_every` only thins the VTK output
    let cfg = SolverConfig {
        save_every: 1,
        ..spec.solver_config()
    };
    cfg.validate(spec.dim)?;
    let state0 = preset_state(spec, &grid)?;
    let traj = run(&model, &grid, &cfg, &state0, None);
    let energy = energy_report(&traj, &model, &grid, None)?;
    let dets = min_det_series(&traj, &grid);

    write_file(out_dir, "diagnostics.csv", &diagnostics_csv(&energy, &dets))?;
    let last_index = traj.states.len() - 1;
    let mut written = 0;
    for (k, s) in traj.states.iter().enumerate() {
        if k % spec.save_every == 0 || k == last_index {
            write_file(out_dir, &format!("snapshot_{written}.vtk"), &vtk_snapshot(&grid, s))?;
            written += 1;
        }
    }

    let last = traj.states.last().expect("trajectory holds the initial state");
    let (status, termination, message) = match traj.termination {
        Termination::Completed => (ExitStatus::Ok, "completed".to_string(), None),
        Termination::DetFloorHit { time } => (
            ExitStatus::Breakdown,
            "det_floor_hit".to_string(),
            Some(format!("det ∇ξ fell below {} at t = {time}", spec.det_floor)),
        ),
        Termination::PicardDivergence { time } => (
            ExitStatus::SolverFailure,
            "picard_divergence".to_string(),
            Some(format!("Picard iteration diverged at t = {time}")),
        ),
        Termination::LinearSolverFailure { time } => (
            ExitStatus::SolverFailure,
            "linear_solver_failure".to_string(),
            Some(format!("linear solver failed at t = {time}")),
        ),
    };
    let mut report = Report::default();
    report.put("command", "simulate");
    report.put("model", model_line(spec));
    report.put("preset", spec.preset);
    report.put("dim", spec.dim);
    report.put("cells", spec.cells);
    report.put("termination", termination);
    match traj.termination {
        Termination::DetFloorHit { time }
        | Termination::PicardDivergence { time }
        | Termination::LinearSolverFailure { time } => report.real("termination_time", time),
        Termination::Completed => {}
    }
    report.real("final_time", last.time);
    report.put("steps", last_index);
    report.put("vtk_snapshots", written);
    let k = energy.len() - 1;
    report.real("final_energy", energy.total(k));
    report.real("final_residual", energy.residual[k]);
    report.real("final_min_det", dets[k].1);
    Ok(CommandOutcome {
        status,
        report,
        message,
    })
}

/// Rows of the convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub study: &'static str,
    pub cells: usize,
    pub dt: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Spatial levels refine `h` with continuum forcing at a small fixed `dt`;
/// temporal levels refine `dt` with the scheme-consistent forcing, which
/// removes the spatial error entirely.
pub fn convergence_table(spec: &RunSpec) -> Result<Vec<ConvergenceRow>> {
    let model = spec.model()?;
    let exact = DecayingMode {
        dim: spec.dim,
        amplitude: spec.exact_amplitude,
    };
    let scale = match spec.stencil {
        Stencil::Consistent => 1.0,
        Stencil::Broken => 1.1,
    };
    let mut rows = Vec::new();
    let mut level = |study: &'static str, cells: usize, dt: f64, t_end: f64, mode: ForcingMode| -> Result<()> {
        let grid = Grid::new(spec.dim, cells)?;
        let cfg = SolverConfig {
            dt,
            t_end,
            save_every: usize::MAX,
            ..spec.solver_config()
        };
        let forcing = ManufacturedForcing {
            model: &model,
            exact: &exact,
            mode,
            divergence_scale: scale,
        };
        let e = manufactured_run_with(&grid, &cfg, &forcing)?;
        rows.push(ConvergenceRow {
            study,
            cells,
            dt,
            l2: e.l2,
            linf: e.linf,
        });
        Ok(())
    };
    for i in 0..spec.levels {
        level("spatial", spec.spatial_cells << i, spec.spatial_dt, spec.spatial_t_end, ForcingMode::Continuous)?;
    }
    for i in 0..spec.levels {
        let dt = spec.dt / (1u64 << i) as f64;
        level("temporal", spec.temporal_cells, dt, spec.t_end, ForcingMode::Discrete)?;
    }
    Ok(rows)
}

fn min_rate(rates: &[f64]) -> f64 {
    rates.iter().fold(f64::INFINITY, |m, &r| if r.is_nan() { f64::NAN } else { m.min(r) })
}

pub fn cmd_convergence(spec: &RunSpec, out_dir: &Path) -> Result<CommandOutcome> {
    let rows = convergence_table(spec)?;
    let rates_of = |study: &str| {
        let errs: Vec<f64> = rows.iter().filter(|r| r.study == study).map(|r| r.linf).collect();
        observed_rates(&errs)
    };
    let (spatial, temporal) = (rates_of("spatial"), rates_of("temporal"));

    let mut csv = String::from("study,cells,dt,l2,linf,rate\n");
    for (i, row) in rows.iter().enumerate() {
        let within = i % spec.levels;
        let rates = if row.study == "spatial" { &spatial } else { &temporal };
        let rate = if within == 0 { String::new() } else { fmt_real(rates[within - 1]) };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{rate}",
            row.study,
            row.cells,
            fmt_real(row.dt),
            fmt_real(row.l2),
            fmt_real(row.linf)
        );
    }
    write_file(out_dir, "convergence.csv", &csv)?;

    let (s, t) = (min_rate(&spatial), min_rate(&temporal));
    let pass = s >= spec.min_spatial_rate && t >= spec.min_temporal_rate;
    let join = |v: &[f64]| v.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(" ");
    let mut report = Report::default();
    report.put("command", "convergence");
    report.put("model", model_line(spec));
    report.put("dim", spec.dim);
    report.put("levels", spec.levels);
    report.put("stencil", spec.stencil);
    report.put("spatial_rates", join(&spatial));
    report.put("temporal_rates", join(&temporal));
    report.real("spatial_rate", s);
    report.real("temporal_rate", t);
    report.put("pass", pass);
    Ok(if pass {
        CommandOutcome {
            status: ExitStatus::Ok,
            report,
            message: None,
        }
    } else {
        CommandOutcome::failed(
            ExitStatus::ConvergenceFailure,
            report,
            format!(
                "observed rates (spatial {s:.3}, temporal {t:.3}) below ({}, {})",
                spec.min_spatial_rate, spec.min_temporal_rate
            ),
        )
    })
}
