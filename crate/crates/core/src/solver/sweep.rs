use std::path::PathBuf;

use rayon::prelude::*;

use crate::fields::{leray_project, Grid, ScalarField, VectorField};
use crate::homogenization::Envelope;
use crate::snapshot::Snapshot;
use crate::Real;

use super::{BoxSolver, PhysicalParams, SolverError, SolverState};

/// Separable oscillating initial data: `u⁰(x, y) = a_u χ(x)(0, sin 2πy₁)` and
/// `θ⁰(x, y) = a_θ χ(x) cos 2πy₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepProfile<T> {
    pub amp_u: T,
    pub amp_theta: T,
    pub chi: Envelope<T>,
}

impl<T: Real> SweepProfile<T> {
    pub fn is_zero(&self) -> bool {
        self.amp_u == T::zero() && self.amp_theta == T::zero()
    }

    /// `(u⁰(x, ·), θ⁰(x, ·))` on a cell grid at the fixed point `x`.
    pub fn cell_data(&self, x: (T, T), grid: &Grid<T>) -> (VectorField<T>, ScalarField<T>) {
        let tp = T::two_pi();
        let c = self.chi.value(x.0, x.1);
        let (a, b) = (self.amp_u * c, self.amp_theta * c);
        let u = VectorField::from_fn(*grid, |y1, _| [T::zero(), a * (tp * y1).sin()]);
        let th = ScalarField::from_fn(*grid, |y1, _| b * (tp * y1).cos());
        (u, th)
    }
}

/// `a = ε^{1/2} ∇×(ε χ(x) ψ(x/ε))` with `ψ(y) = cos(2πy₁)/2π`, projected onto
/// the discretely solenoidal fields, and `b = θ⁰(x, x/ε)`.
pub fn oscillatory_initial_data<T: Real>(
    grid: &Grid<T>,
    profile: &SweepProfile<T>,
    eps: T,
) -> Result<(VectorField<T>, ScalarField<T>), SolverError> {
    let tp = T::two_pi();
    let se = eps.sqrt();
    let a = profile.amp_u;
    let chi = profile.chi;
    let u = VectorField::from_fn(*grid, |x, z| {
        let y = tp * x / eps;
        let psi = y.cos() / tp;
        let dpsi = -y.sin();
        let c = chi.value(x, z);
        let (cx, cz) = chi.gradient(x, z);
        [a * se * eps * cz * psi, -a * se * (eps * cx * psi + c * dpsi)]
    });
    let mut u = leray_project(&u)?;
    u.zero_walls();
    let b = profile.amp_theta;
    let mut theta = ScalarField::from_fn(*grid, |x, z| b * chi.value(x, z) * (tp * x / eps).cos());
    theta.zero_walls();
    Ok((u, theta))
}

#[derive(Debug, Clone)]
pub struct SweepConfig<T> {
    pub grid: Grid<T>,
    pub params: PhysicalParams<T>,
    pub gamma: T,
    pub theta_source: bool,
    pub profile: SweepProfile<T>,
    /// Fast-time step; each member uses `dt = dτ √ε`.
    pub dtau: T,
    pub tau_end: T,
    /// Checkpoint cadence in steps, shared by all members.
    pub checkpoint_every: usize,
    pub out_dir: Option<PathBuf>,
}

/// Suprema over the run of the uniform-bound monitors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepMonitors<T> {
    /// `ε^{−1/2}‖u_ε‖_{L²}`
    pub u_scaled: T,
    /// `ε^{1/2}‖∇u_ε‖_{L²}`
    pub grad_scaled: T,
    /// `‖(u_ε·∇)u_ε‖_{L¹}`
    pub advection_l1: T,
}

/// One trajectory of the sweep, sampled at the shared τ checkpoints.
#[derive(Debug, Clone)]
pub struct SweepMember<T: Real> {
    pub eps: T,
    pub taus: Vec<T>,
    pub u: Vec<VectorField<T>>,
    pub theta: Vec<ScalarField<T>>,
    pub monitors: SweepMonitors<T>,
    pub files: Vec<PathBuf>,
}

fn run_member<T: Real>(cfg: &SweepConfig<T>, eps: T) -> Result<SweepMember<T>, SolverError> {
    let mut solver = BoxSolver::new(cfg.grid, cfg.params)?
        .with_gamma(cfg.gamma)
        .with_theta_source(cfg.theta_source);
    let (u, theta) = oscillatory_initial_data(&cfg.grid, &cfg.profile, eps)?;
    let mut state = SolverState::new(u, theta, eps)?;
    solver.initialize(&mut state)?;
    let se = eps.sqrt();
    let dt = cfg.dtau * se;
    let steps = (cfg.tau_end / cfg.dtau).round().to_usize().unwrap_or(0);
    let every = cfg.checkpoint_every.max(1);
    let mut member = SweepMember {
        eps,
        taus: Vec::new(),
        u: Vec::new(),
        theta: Vec::new(),
        monitors: SweepMonitors::default(),
        files: Vec::new(),
    };
    let dir = match &cfg.out_dir {
        Some(d) => {
            let d = d.join(format!("eps_{:.6}", eps.as_f64()));
            std::fs::create_dir_all(&d)?;
            Some(d)
        }
        None => None,
    };
    for n in 0..=steps {
        if n > 0 {
            solver.step(&mut state, dt)?;
        }
        let d = state.history.last().expect("initialized");
        let m = &mut member.monitors;
        m.u_scaled = m.u_scaled.max(d.u.l2 / se);
        m.grad_scaled = m.grad_scaled.max(d.u.grad_l2 * se);
        if n % every == 0 || n == steps {
            let adv = solver.advection_term(&state.u);
            let l1 = adv
                .u1()
                .zip_map(adv.u2(), |a, b| (a * a + b * b).sqrt())
                .map(|v| v.magnitude())
                .integral();
            m.advection_l1 = m.advection_l1.max(l1);
            let tau = cfg.dtau * T::from_usize_lossy(n);
            if let Some(d) = &dir {
                let e = eps.as_f64();
                let k = member.taus.len();
                let pu = d.join(format!("u_{k:04}.bhf"));
                Snapshot::vector("u", state.t, &state.u)
                    .with_tag("eps", e)
                    .with_tag("tau", tau.as_f64())
                    .save(&pu)?;
                let pt = d.join(format!("theta_{k:04}.bhf"));
                Snapshot::scalar("theta", state.t, &state.theta)
                    .with_tag("eps", e)
                    .with_tag("tau", tau.as_f64())
                    .save(&pt)?;
                member.files.push(pu);
                member.files.push(pt);
            }
            member.taus.push(tau);
            member.u.push(state.u.clone());
            member.theta.push(state.theta.clone());
        }
    }
    if let Some(d) = &dir {
        let p = d.join("diagnostics.csv");
        super::write_diagnostics_csv(&p, &state.history)?;
        member.files.push(p);
    }
    Ok(member)
}

/// Runs the ε-scaled system for every `ε` of a strictly decreasing list in
/// parallel, one worker per member.
pub fn epsilon_sweep<T: Real>(cfg: &SweepConfig<T>, eps_list: &[T]) -> Result<Vec<SweepMember<T>>, SolverError> {
    let ok = !eps_list.is_empty()
        && eps_list.iter().all(|&e| e > T::zero() && e <= T::one())
        && eps_list.windows(2).all(|w| w[0] > w[1]);
    if !ok {
        return Err(SolverError::BadEpsList);
    }
    eps_list.par_iter().map(|&e| run_member(cfg, e)).collect()
}
