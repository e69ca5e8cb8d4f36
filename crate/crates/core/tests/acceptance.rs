//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use viscolab::constitutive::{
    energy, piola_stress, sample_deformation, sample_matrix, validate_axioms, viscous_stress, viscous_tangent_q,
    ConstitutiveModel, EnergyModel, ViscosityModel,
};
use viscolab::diagnostics::{energy_report, min_det_series, theta_norm};
use viscolab::harness::commands::{convergence_table, execute, preset_state, ExitStatus};
use viscolab::harness::config::{Preset, RunSpec};
use viscolab::harness::output::validate_vtk;
use viscolab::solver::manufactured::observed_rates;
use viscolab::solver::stepper::{heat_extension, run, semi_implicit_step, FieldState, Termination};
use viscolab::solver::Grid;
use viscolab::tensor::{FourthOrderTensor, SquareMatrix, Vector};
use viscolab::wellposedness::{
    acoustic_spectrum, closed_form_gamma, fourier_korn_sample, rank_one_min, sector_scan, TrigField, TrigMode,
    DEFAULT_REFINE_ITERS,
};
use viscolab::Error;

type M = SquareMatrix<f64>;
type T4 = FourthOrderTensor<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn energies() -> [EnergyModel<f64>; 3] {
    [EnergyModel::W0, EnergyModel::W1 { q: 2.0 }, EnergyModel::W2 { q: 2.0 }]
}

fn viscosities() -> [ViscosityModel; 5] {
    [
        ViscosityModel::Z0DoublePrime,
        ViscosityModel::Z0Prime,
        ViscosityModel::Zm { m: 0 },
        ViscosityModel::Zm { m: 1 },
        ViscosityModel::Zm { m: 2 },
    ]
}

fn w0_z0pp() -> ConstitutiveModel<f64> {
    ConstitutiveModel::new(EnergyModel::W0, ViscosityModel::Z0DoublePrime).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let mut worst = (0.0f64, f64::INFINITY);
    let mut failures = Vec::new();
    for dim in [2, 3] {
        for e in energies() {
            for v in viscosities() {
                let model = ConstitutiveModel::new(e, v).unwrap();
                let r = validate_axioms(&model, dim, 1000, 2024 + dim as u64, 1e-9);
                let res = r
                    .max_frame_invariance_residual_w
                    .max(r.max_frame_invariance_residual_z)
                    .max(r.max_angular_momentum_residual);
                worst = (worst.0.max(res), worst.1.min(r.min_dissipation));
                if r.samples_tested != 1000 || res > 1e-9 || r.min_dissipation < -1e-12 {
                    failures.push(format!("{}+{} n={dim}", e.name(), v.name()));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "30 models x 1000 samples, max residual {:.2e} (<= 1e-9), min Z:Q {:.2e} (>= -1e-12){}",
            worst.0,
            worst.1,
            if failures.is_empty() { String::new() } else { format!(", failing: {failures:?}") }
        ),
    )
}

/// Central difference of `g` in the direction of the matrix unit `E_ab`.
fn fd_column(n: usize, h: f64, a: usize, b: usize, base: &M, g: impl Fn(&M) -> M) -> M {
    let mut e = M::zeros(n);
    e[(a, b)] = h;
    (g(&(*base + e)) - g(&(*base - e))) * (0.5 / h)
}

fn criterion_2() -> Outcome {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut worst_w = 0.0f64;
    for n in [2, 3] {
        for v in viscosities() {
            for _ in 0..100 {
                let f: M = sample_deformation(&mut rng, n);
                let q: M = sample_matrix(&mut rng, n);
                let tangent = viscous_tangent_q(&v, &f, &q).unwrap();
                let mut err = 0.0f64;
                let mut scale = 0.0f64;
                for a in 0..n {
                    for b in 0..n {
                        let mut e = M::zeros(n);
                        e[(a, b)] = 1.0;
                        let exact = tangent.apply(&e);
                        let fd = fd_column(n, h, a, b, &q, |qq| viscous_stress(&v, &f, qq).unwrap());
                        err = err.max((exact - fd).max_abs());
                        scale = scale.max(exact.max_abs());
                    }
                }
                worst = worst.max(err / scale);
            }
        }
        for _ in 0..100 {
            let f: M = sample_deformation(&mut rng, n);
            let p = piola_stress(&EnergyModel::W0, &f).unwrap();
            let fd = M::from_fn(n, |a, b| {
                let mut e = M::zeros(n);
                e[(a, b)] = h;
                (energy(&EnergyModel::W0, &(f + e)) - energy(&EnergyModel::W0, &(f - e))) / (2.0 * h)
            });
            worst_w = worst_w.max((p - fd).max_abs() / p.max_abs().max(1.0));
        }
    }
    outcome(
        worst <= 1e-6 && worst_w <= 1e-6,
        format!("max relative error D_QZ {worst:.2e}, DW(W0) {worst_w:.2e} (<= 1e-6, FD step 1e-5, n = 2, 3)"),
    )
}

/// Brute-force minimum of `⟨M(a⊗b):a⊗b⟩` over two unit-vector grids in 2D.
fn dense_scan(m: &T4, points: usize) -> f64 {
    let dirs: Vec<Vector<f64>> = (0..points)
        .map(|i| {
            let t = PI * i as f64 / points as f64;
            Vector::from_slice(&[t.cos(), t.sin()])
        })
        .collect();
    let mut best = f64::INFINITY;
    for a in &dirs {
        for b in &dirs {
            best = best.min(m.rank_one_form(a, b));
        }
    }
    best
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (label, m, expect) in [("sym", T4::sym_map(2), 2.0), ("2sym", T4::sym_map(2).scaled(2.0), 1.0)] {
        let r = rank_one_min(&m, 360, DEFAULT_REFINE_ITERS);
        let oracle = 1.0 / dense_scan(&m, 720);
        let good = ((r.gamma_est - oracle) / oracle).abs() <= 0.01 && ((r.gamma_est - expect) / expect).abs() <= 0.01;
        ok &= good;
        notes.push(format!("{label}: gamma {:.6} oracle {:.6}", r.gamma_est, oracle));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bounded = [
        ViscosityModel::Z0DoublePrime,
        ViscosityModel::Z0Prime,
        ViscosityModel::Zm { m: 1 },
        ViscosityModel::Zm { m: 2 },
    ];
    for v in bounded {
        for n in [2, 3] {
            let (mut tested, mut worst) = (0, 0.0f64);
            let res = if n == 2 { 360 } else { 120 };
            while tested < 100 {
                let f: M = sample_deformation(&mut rng, n);
                let q: M = sample_matrix(&mut rng, n);
                let closed = match closed_form_gamma(&v, &f, &q) {
                    Ok(c) => c,
                    Err(Error::DegenerateQ { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                let m = viscous_tangent_q(&v, &f, &q).unwrap();
                let g = rank_one_min(&m, res, DEFAULT_REFINE_ITERS).gamma_est;
                worst = worst.max(g / closed);
                tested += 1;
            }
            ok &= worst <= 1.001;
            notes.push(format!("{} n={n}: max gamma/closed {worst:.4}", v.name()));
        }
    }
    // Z0: both values reported, discrepancy flagged rather than passed or corrected
    let z0 = ViscosityModel::Zm { m: 0 };
    let id = M::identity(2);
    let est = rank_one_min(&viscous_tangent_q(&z0, &id, &M::zeros(2)).unwrap(), 360, DEFAULT_REFINE_ITERS).gamma_est;
    let closed = closed_form_gamma(&z0, &id, &M::zeros(2)).unwrap();
    let discrepancy = est > closed * 1.001;
    notes.push(format!("z0 at Id: gamma_est {est:.6} vs closed form {closed:.6}, discrepancy flagged = {discrepancy}"));
    ok &= discrepancy;
    outcome(ok, notes.join("; "))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_margin = f64::INFINITY;
    let mut all_elliptic = true;
    let mut tested = 0;
    for v in viscosities() {
        for n in [2, 3] {
            let mut count = 0;
            while count < 20 {
                let f: M = sample_deformation(&mut rng, n);
                let q: M = sample_matrix(&mut rng, n);
                let m = viscous_tangent_q(&v, &f, &q).unwrap();
                let g = rank_one_min(&m, if n == 2 { 360 } else { 120 }, DEFAULT_REFINE_ITERS).gamma_est;
                if !g.is_finite() {
                    continue;
                }
                let s = sector_scan(&m, 360);
                worst_margin = worst_margin.min(s.min_real_part - 1.0 / g);
                all_elliptic &= s.elliptic;
                count += 1;
                tested += 1;
            }
        }
    }
    let two_sym = T4::sym_map(2).scaled(2.0);
    let mut spectrum_err = 0.0f64;
    for t in 0..36 {
        let ang = 2.0 * PI * t as f64 / 36.0;
        let mut ev: Vec<f64> = acoustic_spectrum(&two_sym, &Vector::from_slice(&[ang.cos(), ang.sin()]))
            .iter()
            .map(|z| {
                spectrum_err = spectrum_err.max(z.im.abs());
                z.re
            })
            .collect();
        ev.sort_by(f64::total_cmp);
        spectrum_err = spectrum_err.max((ev[0] - 1.0).abs()).max((ev[1] - 2.0).abs());
    }
    outcome(
        worst_margin >= -1e-6 && all_elliptic && spectrum_err <= 1e-10,
        format!(
            "{tested} points, min(min_real_part - 1/gamma) = {worst_margin:.2e} (>= -1e-6), elliptic = {all_elliptic}; 2sym spectrum error {spectrum_err:.1e} (<= 1e-10)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tensors: Vec<T4> = vec![T4::sym_map(2), T4::sym_map(2).scaled(2.0), T4::identity(2), T4::sym_map(3)];
    for v in viscosities() {
        for n in [2, 3] {
            let f: M = sample_deformation(&mut rng, n);
            let q: M = sample_matrix(&mut rng, n);
            tensors.push(viscous_tangent_q(&v, &f, &q).unwrap());
        }
    }
    let mut worst_gap = f64::INFINITY;
    let mut single_err = 0.0f64;
    for (i, m) in tensors.iter().enumerate() {
        let n = m.dim();
        let r = rank_one_min(m, if n == 2 { 360 } else { 64 }, DEFAULT_REFINE_ITERS);
        let worst = fourier_korn_sample(m, 100, 3, 500 + i as u64);
        worst_gap = worst_gap.min(worst - r.ratio_min);
        for _ in 0..10 {
            let mut wave = [0i64; 3];
            for w in wave.iter_mut().take(n) {
                *w = rng.gen_range(-3..=3);
            }
            if wave.iter().all(|&w| w == 0) {
                wave[0] = 1;
            }
            let c = Vector::from_slice(&(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
            let field = TrigField {
                dim: n,
                modes: vec![TrigMode {
                    wave,
                    cos_coef: c,
                    sin_coef: Vector::zeros(n),
                }],
            };
            let k = Vector::from_slice(&wave[..n].iter().map(|&w| w as f64).collect::<Vec<_>>());
            let expect = m.rank_one_form(&c.normalized(), &k.normalized());
            single_err = single_err.max((field.korn_ratio(m) - expect).abs());
        }
    }
    outcome(
        worst_gap >= -1e-9 && single_err <= 1e-10,
        format!(
            "{} tensors x 100 fields, min(worst_ratio - ratio_min) = {worst_gap:.2e} (>= -1e-9); single-mode error {single_err:.1e} (<= 1e-10)",
            tensors.len()
        ),
    )
}

fn decay_spec(dim: usize, cells: usize, dt: f64, t_end: f64) -> RunSpec {
    RunSpec {
        preset: Preset::Sinusoidal,
        amplitude: 0.1,
        mode: 1,
        dim,
        cells,
        dt,
        t_end,
        save_every: 1,
        ..RunSpec::default()
    }
}

fn criterion_6() -> Outcome {
    let mut stationary = 0.0f64;
    for dim in [1, 2] {
        let grid = Grid::new(dim, 8).unwrap();
        for e in energies() {
            for v in viscosities() {
                let model = ConstitutiveModel::new(e, v).unwrap();
                let cfg = decay_spec(dim, 8, 1e-3, 1.0).solver_config();
                let rest = FieldState::rest(&grid);
                let steps = if e == EnergyModel::W0 && v == ViscosityModel::Z0DoublePrime { 1000 } else { 20 };
                let mut s = rest.clone();
                for _ in 0..steps {
                    let next = semi_implicit_step(&s, &model, &grid, &cfg).unwrap().state;
                    stationary = stationary.max(max_abs_diff(&next.xi, &s.xi)).max(max_abs_diff(&next.v, &s.v));
                    s = next;
                }
            }
        }
    }
    let model = w0_z0pp();
    let mut residuals = Vec::new();
    let mut monotone = true;
    for dt in [1e-3, 5e-4] {
        let spec = decay_spec(1, 64, dt, 1.0);
        let grid = Grid::new(1, 64).unwrap();
        let traj = run(&model, &grid, &spec.solver_config(), &preset_state(&spec, &grid).unwrap(), None);
        let r = energy_report(&traj, &model, &grid, None).unwrap();
        monotone &= traj.termination == Termination::Completed;
        monotone &= (1..r.len()).all(|k| r.total(k) <= r.total(k - 1));
        residuals.push(r.residual.last().unwrap().abs());
    }
    let ratio = residuals[0] / residuals[1];
    outcome(
        stationary <= 1e-12 && monotone && ratio >= 1.8,
        format!(
            "rest drift {stationary:.1e} per step (<= 1e-12), energy nonincreasing = {monotone}, residual {:.3e} -> {:.3e}, ratio {ratio:.3} (>= 1.8)",
            residuals[0], residuals[1]
        ),
    )
}

fn rates(spec: &RunSpec) -> (Vec<f64>, Vec<f64>) {
    let rows = convergence_table(spec).unwrap();
    let pick = |s: &str| observed_rates(&rows.iter().filter(|r| r.study == s).map(|r| r.linf).collect::<Vec<_>>());
    (pick("spatial"), pick("temporal"))
}

fn criterion_7() -> Outcome {
    let one_d = RunSpec {
        levels: 4,
        spatial_cells: 8,
        spatial_dt: 2e-5,
        spatial_t_end: 0.1,
        temporal_cells: 64,
        dt: 1e-3,
        t_end: 1.0,
        ..RunSpec::default()
    };
    let (s1, t1) = rates(&one_d);
    let two_d = RunSpec {
        dim: 2,
        levels: 3,
        spatial_cells: 8,
        spatial_dt: 5e-5,
        spatial_t_end: 0.1,
        temporal_cells: 32,
        dt: 4e-3,
        t_end: 0.4,
        ..RunSpec::default()
    };
    let (s2, t2) = rates(&two_d);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = min(&s1) >= 1.9 && min(&t1) >= 0.9 && min(&s2) >= 1.7 && min(&t2) >= 0.8;
    let fmt = |v: &[f64]| v.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join("/");
    outcome(
        pass,
        format!(
            "1D spatial {} (>= 1.9), temporal {} (>= 0.9); 2D N=32 spatial {} (>= 1.7), temporal {} (>= 0.8)",
            fmt(&s1),
            fmt(&t1),
            fmt(&s2),
            fmt(&t2)
        ),
    )
}

fn criterion_8() -> Outcome {
    let spec = RunSpec {
        preset: Preset::Compression,
        save_every: 1,
        ..RunSpec::default()
    };
    let grid = Grid::new(spec.dim, spec.cells).unwrap();
    let traj = run(&spec.model().unwrap(), &grid, &spec.solver_config(), &preset_state(&spec, &grid).unwrap(), None);
    let series = min_det_series(&traj, &grid);
    let tail = &series[series.len().saturating_sub(10)..];
    let decreasing = tail.len() == 10 && tail.windows(2).all(|w| w[1].1 < w[0].1);
    let (hit, time) = match traj.termination {
        Termination::DetFloorHit { time } => (time.is_finite(), time),
        _ => (false, f64::NAN),
    };
    let last = series.last().unwrap().1;
    let dir = tempfile::tempdir().unwrap();
    let cli = execute(
        &RunSpec {
            command: viscolab::harness::Command::Simulate,
            ..spec.clone()
        },
        dir.path(),
    );
    let exit3 = cli.status == ExitStatus::Breakdown;
    outcome(
        hit && decreasing && last <= spec.det_floor && exit3,
        format!(
            "det_floor_hit at t = {time}, last min det {last:.3e}, final 10 samples strictly decreasing = {decreasing}, simulate exit {}",
            cli.status.code()
        ),
    )
}

fn criterion_9() -> Outcome {
    let spec = decay_spec(1, 64, 1e-3, 0.4);
    let grid = Grid::new(1, 64).unwrap();
    let state0 = preset_state(&spec, &grid).unwrap();
    let traj = run(&w0_z0pp(), &grid, &spec.solver_config(), &state0, None);
    let ext = heat_extension(&grid, &state0.xi, &state0.v, spec.dt, spec.t_end).unwrap();
    let p = spec.p_norm();
    let reports: Vec<_> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&t| theta_norm(&grid, &traj.truncated(t), &ext.truncated(t), p).unwrap())
        .collect();
    let dec = |f: fn(&viscolab::diagnostics::ThetaReport<f64>) -> f64| reports.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let pass = dec(|r| r.theta) && dec(|r| r.d_of_t);
    let table: Vec<String> = reports
        .iter()
        .map(|r| format!("T={} theta={:.3e} D={:.3e}", r.t_final, r.theta, r.d_of_t))
        .collect();
    outcome(pass, table.join(", "))
}

fn criterion_10() -> Outcome {
    let spec = RunSpec {
        command: viscolab::harness::Command::Simulate,
        preset: Preset::Sinusoidal,
        dim: 2,
        cells: 8,
        t_end: 0.05,
        save_every: 5,
        seed: 42,
        ..RunSpec::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let statuses: Vec<_> = dirs.iter().map(|d| execute(&spec, d.path()).status).collect();
    let csv: Vec<Vec<u8>> = dirs
        .iter()
        .map(|d| std::fs::read(d.path().join("diagnostics.csv")).unwrap())
        .collect();
    let identical = csv[0] == csv[1];
    let mut vtk_ok = 0;
    let mut vtk_bad = 0;
    for d in &dirs {
        for entry in std::fs::read_dir(d.path()).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "vtk") {
                match validate_vtk(&std::fs::read_to_string(&path).unwrap()) {
                    Ok(_) => vtk_ok += 1,
                    Err(_) => vtk_bad += 1,
                }
            }
        }
    }
    outcome(
        statuses.iter().all(|s| *s == ExitStatus::Ok) && identical && vtk_bad == 0 && vtk_ok > 0,
        format!("CSV byte-identical = {identical}, VTK files valid {vtk_ok}, invalid {vtk_bad}"),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome, Duration); 10] = [
        (1, criterion_1, Duration::from_secs(5)),
        (2, criterion_2, Duration::from_secs(5)),
        (3, criterion_3, Duration::from_secs(60)),
        (4, criterion_4, Duration::from_secs(3600)),
        (5, criterion_5, Duration::from_secs(3600)),
        (6, criterion_6, Duration::from_secs(30)),
        (7, criterion_7, Duration::from_secs(300)),
        (8, criterion_8, Duration::from_secs(3600)),
        (9, criterion_9, Duration::from_secs(3600)),
        (10, criterion_10, Duration::from_secs(3600)),
    ];
    let mut failed = Vec::new();
    for (id, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        let budget_note = if budget.as_secs() < 3600 {
            format!(", budget {}s", budget.as_secs())
        } else {
            String::new()
        };
        println!(
            "criterion {id:>2}: {} [{:.2}s{budget_note}] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            result.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
