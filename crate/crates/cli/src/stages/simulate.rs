use std::path::{Path, PathBuf};

use benard_core::cell::{family_mean_divergence, solve_cell_family, CellFamilyConfig, CellParams};
use benard_core::fields::{random_band_limited, Grid, ScalarField, VectorField};
use benard_core::homogenization::{lattice_samples, XLattice};
use benard_core::solver::{epsilon_sweep, BoxSolver, DtPolicy, RunConfig, SolverState, SweepConfig, SweepProfile};

use super::{fmt_f, load::read_gradp0, write_csv};
use crate::config::{DtChoice, ExperimentConfig, GradP0, InitKind};
use crate::CliError;

pub(crate) fn box_grid(cfg: &ExperimentConfig) -> Result<Grid<f64>, CliError> {
    Ok(Grid::new_box(cfg.nx, cfg.nz, cfg.lx, cfg.h)?)
}

pub(crate) fn lattice(cfg: &ExperimentConfig) -> XLattice<f64> {
    XLattice::new(cfg.lattice_n1, cfg.lattice_n2, cfg.lx, cfg.h)
}

pub(crate) fn profile(cfg: &ExperimentConfig) -> SweepProfile<f64> {
    SweepProfile {
        amp_u: cfg.amp_u,
        amp_theta: cfg.amp_theta,
        chi: cfg.chi_envelope(),
    }
}

pub fn initial_theta(cfg: &ExperimentConfig, grid: Grid<f64>) -> ScalarField<f64> {
    let pi = std::f64::consts::PI;
    match cfg.init {
        InitKind::Rest => ScalarField::zeros(grid),
        InitKind::Mode => {
            let m = cfg.init_mode as f64;
            let mut f = ScalarField::from_fn(grid, |x, z| {
                cfg.init_amp * (pi * z / cfg.h).sin() * (2.0 * pi * m * x / cfg.lx).cos()
            });
            f.zero_walls();
            f
        }
        InitKind::Random => {
            let f = random_band_limited(grid, 4, cfg.seed);
            let peak = f.max_abs();
            if peak > 0.0 {
                f.scaled(cfg.init_amp / peak)
            } else {
                f
            }
        }
    }
}

/// Plain box run into `<out>/run`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let grid = box_grid(cfg)?;
    let mut solver = BoxSolver::new(grid, cfg.params())?;
    let mut state = SolverState::new(VectorField::zeros(grid), initial_theta(cfg, grid), 1.0)?;
    let dt = match cfg.dt_policy {
        DtChoice::Fixed => DtPolicy::Fixed(cfg.dt),
        DtChoice::Auto => DtPolicy::Auto {
            cfl: cfg.cfl,
            dt_max: cfg.dt,
        },
    };
    let rc = RunConfig {
        t_end: cfg.t_end,
        dt,
        snapshot_every: cfg.snapshot_every,
        out_dir: Some(out.join("run")),
        div_tol: cfg.div_tol,
    };
    let o = solver.run(&mut state, &rc)?;
    log::info!("run: {} steps to t = {}", o.steps, state.t);
    let mut files = o.snapshots;
    files.extend(o.diagnostics);
    Ok(files)
}

/// ε-sweep into `<out>/sweep/eps_*/` plus `monitors.csv`.
pub fn sweep(cfg: &ExperimentConfig, eps: &[f64], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let dir = out.join("sweep");
    let sc = SweepConfig {
        grid: box_grid(cfg)?,
        params: cfg.params(),
        gamma: cfg.gamma,
        theta_source: cfg.theta_source,
        profile: profile(cfg),
        dtau: cfg.dtau,
        tau_end: cfg.tau_end,
        checkpoint_every: cfg.checkpoint_every,
        out_dir: Some(dir.clone()),
    };
    let members = epsilon_sweep(&sc, eps)?;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for m in &members {
        files.extend(m.files.iter().cloned());
        let mo = m.monitors;
        rows.push(vec![
            fmt_f(m.eps),
            fmt_f(mo.u_scaled),
            fmt_f(mo.grad_scaled),
            fmt_f(mo.advection_l1),
        ]);
    }
    files.push(write_csv(
        &dir.join("monitors.csv"),
        "eps,u_scaled,grad_scaled,advection_l1",
        &rows,
    )?);
    Ok(files)
}

/// Cell family on the configured x-lattice into `<out>/cell/cell_i_j/`,
/// with cell means and the lattice divergence of the mean velocity.
pub fn cell(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let dir = out.join("cell");
    let lat = lattice(cfg);
    let samples = lattice_samples(&lat);
    let gradp0 = match &cfg.gradp0 {
        GradP0::Zero => vec![[0.0; 2]; samples.len()],
        GradP0::File(p) => read_gradp0(p, &lat)?,
    };
    let fc = CellFamilyConfig {
        n: cfg.cell_n,
        params: CellParams::leading_order(cfg.nu, cfg.kappa, cfg.g_alpha),
        dtau: cfg.dtau,
        tau_end: cfg.tau_end,
        checkpoint_every: cfg.checkpoint_every,
        out_dir: Some(dir.clone()),
    };
    let prof = profile(cfg);
    let init = move |s: &benard_core::cell::CellSample<f64>, g: &Grid<f64>| prof.cell_data(s.x, g);
    let family = solve_cell_family(&samples, &gradp0, &fc, &init)?;
    let mut files = Vec::new();
    let mut means = Vec::new();
    for tr in &family {
        files.extend(tr.files.iter().cloned());
        let (i, j) = tr.sample.tag;
        for m in &tr.means {
            means.push(vec![
                i.to_string(),
                j.to_string(),
                fmt_f(m.tau),
                fmt_f(m.mean_u[0]),
                fmt_f(m.mean_u[1]),
                fmt_f(m.mean_theta),
            ]);
        }
    }
    files.push(write_csv(
        &dir.join("means.csv"),
        "i,j,tau,mean_u1,mean_u2,mean_theta",
        &means,
    )?);
    let (hx, hz) = (cfg.lx / cfg.lattice_n1 as f64, cfg.h / cfg.lattice_n2 as f64);
    let div: Vec<Vec<String>> = family[0]
        .taus
        .iter()
        .enumerate()
        .map(|(k, &tau)| {
            let d = family_mean_divergence(&family, cfg.lattice_n1, cfg.lattice_n2, hx, hz, k);
            vec![k.to_string(), fmt_f(tau), fmt_f(d)]
        })
        .collect();
    files.push(write_csv(&dir.join("mean_divergence.csv"), "k,tau,div_mean_u", &div)?);
    Ok(files)
}
