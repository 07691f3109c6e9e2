//! Time integration of the fluctuation-form Boussinesq system on the box and
//! of its ε-scaled version, in which both diffusivities carry a factor `ε^γ`.

mod run;
mod stepper;
mod sweep;

use std::path::PathBuf;

use thiserror::Error;

use crate::fields::{FieldError, NormReport, ScalarField, VectorField};
use crate::snapshot::SnapshotError;
use crate::Real;

pub use run::{write_diagnostics_csv, DtPolicy, RunConfig, RunOutput};
pub use stepper::BoxSolver;
pub use sweep::{epsilon_sweep, oscillatory_initial_data, SweepConfig, SweepMember, SweepMonitors, SweepProfile};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("CFL number {cfl:.3} exceeds the stability limit {limit}")]
    Cfl { cfl: f64, limit: f64 },
    #[error("non-finite values at step {step} (t = {t}); last good snapshot: {last_good:?}")]
    NonFinite {
        step: usize,
        t: f64,
        last_good: Option<PathBuf>,
    },
    #[error("invariant breach: {0}")]
    Invariant(String),
    #[error("eps list must be strictly decreasing with values in (0, 1]")]
    BadEpsList,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Physical constants of the convection problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T> {
    pub nu: T,
    pub kappa: T,
    /// The product `gα`.
    pub g_alpha: T,
    /// Bottom wall temperature.
    pub t1: T,
    /// Top wall temperature.
    pub t2: T,
    pub h: T,
    pub l: T,
    pub lambda1: T,
}

impl<T: Real> PhysicalParams<T> {
    /// Parameters with `λ₁ = π²/h²`, the lowest Dirichlet mode of the
    /// periodic-lateral box.
    pub fn new(nu: T, kappa: T, g_alpha: T, t1: T, t2: T, h: T, l: T) -> Self {
        let lambda1 = T::PI() * T::PI() / (h * h);
        PhysicalParams {
            nu,
            kappa,
            g_alpha,
            t1,
            t2,
            h,
            l,
            lambda1,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let mut bad = Vec::new();
        let pos = [
            ("nu", self.nu),
            ("kappa", self.kappa),
            ("h", self.h),
            ("L", self.l),
            ("lambda1", self.lambda1),
        ];
        for (name, v) in pos {
            if !(v > T::zero() && v.is_finite()) {
                bad.push(format!("{name} must be positive"));
            }
        }
        if !(self.t1 > self.t2) {
            bad.push("T1 must exceed T2".into());
        }
        if !(self.g_alpha >= T::zero() && self.g_alpha.is_finite()) {
            bad.push("g_alpha must be non-negative".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(SolverError::InvalidParams(bad.join("; ")))
        }
    }

    pub fn delta_t(&self) -> T {
        self.t1 - self.t2
    }

    pub fn rayleigh(&self) -> T {
        self.g_alpha * self.delta_t() * self.h.powi(3) / (self.nu * self.kappa)
    }

    pub fn prandtl(&self) -> T {
        self.nu / self.kappa
    }

    pub fn aspect(&self) -> T {
        self.l / self.h
    }

    /// Coefficient `(T1 − T2)/h` of the vertical velocity in the θ equation.
    pub fn source(&self) -> T {
        self.delta_t() / self.h
    }

    fn conduction(&self, z: T) -> T {
        self.t1 - z / self.h * self.delta_t()
    }
}

/// `θ = T − T1 − (z/h)(T2 − T1)`.
pub fn theta_from_t<T: Real>(temp: &ScalarField<T>, params: &PhysicalParams<T>) -> Result<ScalarField<T>, SolverError> {
    if !temp.grid().is_box() {
        return Err(FieldError::KindMismatch { expected: "box" }.into());
    }
    Ok(temp.map_nodes(|_, z, v| v - params.conduction(z)))
}

/// Inverse of [`theta_from_t`].
pub fn t_from_theta<T: Real>(
    theta: &ScalarField<T>,
    params: &PhysicalParams<T>,
) -> Result<ScalarField<T>, SolverError> {
    if !theta.grid().is_box() {
        return Err(FieldError::KindMismatch { expected: "box" }.into());
    }
    Ok(theta.map_nodes(|_, z, v| v + params.conduction(z)))
}

/// Per-step record of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics<T> {
    pub t: T,
    pub dt: T,
    pub u: NormReport<T>,
    pub theta: NormReport<T>,
    pub theta_max: T,
    pub theta_min: T,
    pub temp_min: T,
    pub temp_max: T,
    pub cfl: T,
    /// `⟨gα e₂θ, u⟩`.
    pub energy_input: T,
    pub div_defect: T,
}

/// Velocity, temperature fluctuation, mean-zero pressure and time.
#[derive(Debug, Clone)]
pub struct SolverState<T: Real> {
    pub u: VectorField<T>,
    pub theta: ScalarField<T>,
    pub p: ScalarField<T>,
    pub t: T,
    pub eps: T,
    pub history: Vec<Diagnostics<T>>,
}

impl<T: Real> SolverState<T> {
    pub fn new(u: VectorField<T>, theta: ScalarField<T>, eps: T) -> Result<Self, SolverError> {
        if u.grid() != theta.grid() {
            return Err(FieldError::GridMismatch.into());
        }
        if !(eps > T::zero() && eps <= T::one()) {
            return Err(SolverError::InvalidParams("eps must lie in (0, 1]".into()));
        }
        let p = ScalarField::zeros(*theta.grid());
        Ok(SolverState {
            u,
            theta,
            p,
            t: T::zero(),
            eps,
            history: Vec::new(),
        })
    }

    pub fn rest(grid: crate::fields::Grid<T>, eps: T) -> Result<Self, SolverError> {
        Self::new(VectorField::zeros(grid), ScalarField::zeros(grid), eps)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.theta.is_finite() && self.p.is_finite()
    }
}
