use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::snapshot::Snapshot;
use crate::Real;

use super::{BoxSolver, Diagnostics, SolverError, SolverState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy<T> {
    Fixed(T),
    /// `dt = cfl·min(dx/|u₁|, dz/|u₂|)` capped at `dt_max`.
    Auto {
        cfl: T,
        dt_max: T,
    },
}

#[derive(Debug, Clone)]
pub struct RunConfig<T> {
    pub t_end: T,
    pub dt: DtPolicy<T>,
    /// Snapshot cadence in steps; 0 writes only the initial and final states.
    pub snapshot_every: usize,
    pub out_dir: Option<PathBuf>,
    /// Relative divergence bound checked after every step.
    pub div_tol: T,
}

impl<T: Real> RunConfig<T> {
    pub fn new(t_end: T, dt: DtPolicy<T>) -> Self {
        RunConfig {
            t_end,
            dt,
            snapshot_every: 0,
            out_dir: None,
            div_tol: T::lit(1e-8),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub steps: usize,
    pub snapshots: Vec<PathBuf>,
    pub diagnostics: Option<PathBuf>,
}

pub fn write_diagnostics_csv<T: Real>(path: &Path, rows: &[Diagnostics<T>]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "t,dt,u_l2,u_h1,theta_l2,theta_max,theta_min,T_min,T_max,cfl,energy_input,div_defect"
    )?;
    for d in rows {
        let cols = [
            d.t,
            d.dt,
            d.u.l2,
            d.u.h1,
            d.theta.l2,
            d.theta_max,
            d.theta_min,
            d.temp_min,
            d.temp_max,
            d.cfl,
            d.energy_input,
            d.div_defect,
        ];
        let line: Vec<String> = cols.iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

fn write_state<T: Real>(dir: &Path, step: usize, state: &SolverState<T>) -> Result<Vec<PathBuf>, SolverError> {
    let eps = state.eps.as_f64();
    let u = dir.join(format!("u_{step:06}.bhf"));
    Snapshot::vector("u", state.t, &state.u)
        .with_tag("eps", eps)
        .with_tag("step", step)
        .save(&u)?;
    let th = dir.join(format!("theta_{step:06}.bhf"));
    Snapshot::scalar("theta", state.t, &state.theta)
        .with_tag("eps", eps)
        .with_tag("step", step)
        .save(&th)?;
    Ok(vec![u, th])
}

impl<T: Real> BoxSolver<T> {
    /// Integrates from `state.t` to `cfg.t_end`, recording diagnostics in
    /// `state.history` and, when an output directory is set, snapshots and
    /// `diagnostics.csv`.
    pub fn run(&mut self, state: &mut SolverState<T>, cfg: &RunConfig<T>) -> Result<RunOutput, SolverError> {
        let mut out = RunOutput::default();
        if let Some(dir) = &cfg.out_dir {
            fs::create_dir_all(dir)?;
        }
        self.initialize(state)?;
        if let Some(dir) = &cfg.out_dir {
            out.snapshots.extend(write_state(dir, 0, state)?);
        }
        let mut last_good = out.snapshots.first().cloned();
        let tiny = T::lit(1e-9);
        let mut written_at = 0;
        while state.t < cfg.t_end * (T::one() - tiny) {
            let remaining = cfg.t_end - state.t;
            let dt = match cfg.dt {
                DtPolicy::Fixed(dt) => dt,
                DtPolicy::Auto { cfl, dt_max } => self.stable_dt(&state.u, cfl, dt_max),
            };
            let dt = if dt > remaining * (T::one() - tiny) {
                remaining
            } else {
                dt
            };
            match self.step(state, dt) {
                Err(SolverError::NonFinite { step, t, .. }) => {
                    return Err(SolverError::NonFinite { step, t, last_good });
                }
                r => r?,
            }
            out.steps += 1;
            let d = state.history.last().expect("step records diagnostics");
            if !(d.div_defect <= cfg.div_tol) {
                return Err(SolverError::Invariant(format!(
                    "divergence defect {:.3e} at t = {}",
                    d.div_defect.as_f64(),
                    state.t
                )));
            }
            if let Some(dir) = &cfg.out_dir {
                if cfg.snapshot_every > 0 && out.steps % cfg.snapshot_every == 0 {
                    let files = write_state(dir, out.steps, state)?;
                    last_good = files.first().cloned();
                    out.snapshots.extend(files);
                    written_at = out.steps;
                }
            }
        }
        if let Some(dir) = &cfg.out_dir {
            if written_at != out.steps {
                out.snapshots.extend(write_state(dir, out.steps, state)?);
            }
            let path = dir.join("diagnostics.csv");
            write_diagnostics_csv(&path, &state.history)?;
            out.diagnostics = Some(path);
        }
        Ok(out)
    }
}
