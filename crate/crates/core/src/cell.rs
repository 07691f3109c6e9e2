//! Leading-order cell problem on the unit torus in the fast variable `y`,
//! driven by a frozen global pressure gradient `∇ₓp₀` at each x-sample.

use std::path::PathBuf;

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{
    divergence_defect_with, leray_modes, vector_norms_with, FieldError, Grid, ScalarField, Spectral, VectorField,
};
use crate::snapshot::{Snapshot, SnapshotError};
use crate::Real;

type C<T> = Complex<T>;

#[derive(Debug, Error)]
pub enum CellError {
    #[error("{samples} x-samples but {forcing} forcing values")]
    SampleMismatch { samples: usize, forcing: usize },
    #[error("non-finite values at τ = {tau}")]
    NonFinite { tau: f64 },
    #[error("CFL number {cfl:.3} exceeds {limit}")]
    Cfl { cfl: f64, limit: f64 },
    #[error("trajectory has {0} samples, at least 3 are needed")]
    TooShort(usize),
    #[error("invalid cell parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams<T> {
    pub nu: T,
    pub kappa: T,
    pub g_alpha: T,
    /// Coefficient of `u₂` in the θ equation: 0 for the leading-order
    /// system, 1 for the normalized mean-ODE variant.
    pub theta_source: T,
    pub advection: bool,
}

impl<T: Real> CellParams<T> {
    pub fn leading_order(nu: T, kappa: T, g_alpha: T) -> Self {
        CellParams {
            nu,
            kappa,
            g_alpha,
            theta_source: T::zero(),
            advection: true,
        }
    }

    /// `ν = κ = gα = 1` with the `u₂` source switched on.
    pub fn normalized() -> Self {
        CellParams {
            nu: T::one(),
            kappa: T::one(),
            g_alpha: T::one(),
            theta_source: T::one(),
            advection: true,
        }
    }

    fn validate(&self) -> Result<(), CellError> {
        if !(self.nu > T::zero() && self.kappa > T::zero() && self.g_alpha.is_finite() && self.theta_source.is_finite())
        {
            return Err(CellError::InvalidParams("nu and kappa must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellState<T: Real> {
    pub u0: VectorField<T>,
    pub theta0: ScalarField<T>,
    /// Mean-zero local pressure.
    pub p1: ScalarField<T>,
    pub tau: T,
    pub forcing_gradp0: [T; 2],
    pub x_sample: (T, T),
}

impl<T: Real> CellState<T> {
    pub fn new(
        u0: VectorField<T>,
        theta0: ScalarField<T>,
        forcing_gradp0: [T; 2],
        x_sample: (T, T),
    ) -> Result<Self, CellError> {
        if u0.grid() != theta0.grid() {
            return Err(FieldError::GridMismatch.into());
        }
        if u0.grid().is_box() {
            return Err(FieldError::KindMismatch { expected: "torus" }.into());
        }
        let p1 = ScalarField::zeros(*u0.grid());
        Ok(CellState {
            u0,
            theta0,
            p1,
            tau: T::zero(),
            forcing_gradp0,
            x_sample,
        })
    }

    pub fn zero(grid: Grid<T>) -> Result<Self, CellError> {
        Self::new(
            VectorField::zeros(grid),
            ScalarField::zeros(grid),
            [T::zero(); 2],
            (T::zero(), T::zero()),
        )
    }

    /// `(∫u₀ dy, ∫θ₀ dy)`.
    pub fn means(&self) -> ([T; 2], T) {
        (self.u0.mean(), self.theta0.mean())
    }
}

struct Explicit<T> {
    n1: Vec<C<T>>,
    n2: Vec<C<T>>,
    nt: Vec<C<T>>,
    dtau: T,
}

/// Pseudospectral IMEX integrator (AB2 + diagonal Crank-Nicolson) for the
/// cell problem. The projection passes the mean mode, so a constant forcing
/// accelerates the cell-mean velocity.
pub struct CellSolver<T: Real> {
    spectral: Spectral<T>,
    params: CellParams<T>,
    cfl_limit: T,
    prev: Option<Explicit<T>>,
}

impl<T: Real> CellSolver<T> {
    pub fn new(grid: Grid<T>, params: CellParams<T>) -> Result<Self, CellError> {
        if grid.is_box() {
            return Err(FieldError::KindMismatch { expected: "torus" }.into());
        }
        params.validate()?;
        Ok(CellSolver {
            spectral: Spectral::new(grid),
            params,
            cfl_limit: T::one(),
            prev: None,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        self.spectral.grid()
    }

    pub fn params(&self) -> &CellParams<T> {
        &self.params
    }

    pub fn reset(&mut self) {
        self.prev = None;
    }

    fn field(&self, v: Vec<T>) -> ScalarField<T> {
        ScalarField::from_vec(*self.grid(), v).expect("cell grid")
    }

    fn advect(&self, u1: &[T], u2: &[T], f: &[T]) -> Vec<T> {
        let sp = &self.spectral;
        let fd = sp.dealias(f);
        let fx = sp.ddx(&fd);
        let fz = sp.ddz(&fd);
        let prod: Vec<T> = (0..f.len()).map(|n| u1[n] * fx[n] + u2[n] * fz[n]).collect();
        sp.dealias(&prod)
    }

    /// Explicit right sides without the constant forcing.
    fn explicit_terms(&self, s: &CellState<T>) -> (Vec<T>, Vec<T>, Vec<T>) {
        let sp = &self.spectral;
        let n = self.grid().len();
        let th = s.theta0.values();
        let u2raw = s.u0.u2().values();
        let (a1, a2, at) = if self.params.advection {
            let u1 = sp.dealias(s.u0.u1().values());
            let u2 = sp.dealias(u2raw);
            (
                self.advect(&u1, &u2, s.u0.u1().values()),
                self.advect(&u1, &u2, u2raw),
                self.advect(&u1, &u2, th),
            )
        } else {
            (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n])
        };
        let ga = self.params.g_alpha;
        let src = self.params.theta_source;
        let n1 = a1.iter().map(|&v| -v).collect();
        let n2 = (0..n).map(|j| ga * th[j] - a2[j]).collect();
        let nt = (0..n).map(|j| src * u2raw[j] - at[j]).collect();
        (n1, n2, nt)
    }

    /// Mean-zero `p₁` with `∇p₁` the gradient part of the explicit force.
    pub fn recover_p1(&self, s: &CellState<T>) -> ScalarField<T> {
        let sp = &self.spectral;
        let (n1, n2, _) = self.explicit_terms(s);
        let a = sp.forward_2d(&n1);
        let b = sp.forward_2d(&n2);
        let nx = self.grid().nx();
        let p: Vec<C<T>> = (0..a.len())
            .map(|j| {
                let (kx, kz) = (sp.kx_first()[j % nx], sp.kz_first()[j / nx]);
                let k2 = kx * kx + kz * kz;
                if k2 == T::zero() {
                    Complex::new(T::zero(), T::zero())
                } else {
                    // p̂ = (ik·N̂)/(−|k|²)
                    (a[j] * kx + b[j] * kz) * Complex::new(T::zero(), T::one()) / (-k2)
                }
            })
            .collect();
        let mut f = self.field(sp.inverse_2d(p));
        f.remove_mean();
        f
    }

    pub fn cfl(&self, u: &VectorField<T>, dtau: T) -> T {
        let g = self.grid();
        let a = u.u1().values().iter().zip(u.u2().values());
        a.fold(T::zero(), |m, (&p, &q)| {
            m.max(p.magnitude() / g.dx() + q.magnitude() / g.dz())
        }) * dtau
    }

    /// Advances the cell by `dτ`; on error the state is untouched.
    pub fn cell_step(&mut self, s: &mut CellState<T>, dtau: T) -> Result<(), CellError> {
        if s.u0.grid() != self.grid() {
            return Err(FieldError::GridMismatch.into());
        }
        let cfl = self.cfl(&s.u0, dtau);
        if cfl > self.cfl_limit {
            return Err(CellError::Cfl {
                cfl: cfl.as_f64(),
                limit: self.cfl_limit.as_f64(),
            });
        }
        let sp = &self.spectral;
        let nx = self.grid().nx();
        let (n1, n2, nt) = self.explicit_terms(s);
        let mut ex = Explicit {
            n1: sp.forward_2d(&n1),
            n2: sp.forward_2d(&n2),
            nt: sp.forward_2d(&nt),
            dtau,
        };
        ex.n1[0] = ex.n1[0] - s.forcing_gradp0[0];
        ex.n2[0] = ex.n2[0] - s.forcing_gradp0[1];
        let (a, b) = match &self.prev {
            Some(p) => {
                let r = dtau / p.dtau;
                (T::one() + r / T::lit(2.0), -r / T::lit(2.0))
            }
            None => (T::one(), T::zero()),
        };
        let comb = |cur: &[C<T>], old: Option<&Vec<C<T>>>| -> Vec<C<T>> {
            match old {
                Some(o) => cur.iter().zip(o).map(|(&c, &o)| c * a + o * b).collect(),
                None => cur.to_vec(),
            }
        };
        let f1 = comb(&ex.n1, self.prev.as_ref().map(|p| &p.n1));
        let f2 = comb(&ex.n2, self.prev.as_ref().map(|p| &p.n2));
        let ft = comb(&ex.nt, self.prev.as_ref().map(|p| &p.nt));
        let half = dtau / T::lit(2.0);
        let cn = |f: &[T], forcing: &[C<T>], d: T| -> Vec<C<T>> {
            let c = sp.forward_2d(f);
            c.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let k2 = sp.kx_sq()[j % nx] + sp.kz_sq()[j / nx];
                    (v * (T::one() - half * d * k2) + forcing[j] * dtau) / (T::one() + half * d * k2)
                })
                .collect()
        };
        let mut v1 = cn(s.u0.u1().values(), &f1, self.params.nu);
        let mut v2 = cn(s.u0.u2().values(), &f2, self.params.nu);
        let th = cn(s.theta0.values(), &ft, self.params.kappa);
        leray_modes(sp, &mut v1, &mut v2);
        let u1 = self.field(sp.inverse_2d(v1));
        let u2 = self.field(sp.inverse_2d(v2));
        let theta = self.field(sp.inverse_2d(th));
        if !(u1.is_finite() && u2.is_finite() && theta.is_finite()) {
            return Err(CellError::NonFinite { tau: s.tau.as_f64() });
        }
        s.u0 = VectorField::new(u1, u2)?;
        s.theta0 = theta;
        s.tau += dtau;
        self.prev = Some(ex);
        s.p1 = self.recover_p1(s);
        Ok(())
    }

    pub fn divergence_defect(&self, s: &CellState<T>) -> T {
        divergence_defect_with(&self.spectral, &s.u0)
    }

    pub fn velocity_norms(&self, s: &CellState<T>) -> crate::fields::NormReport<T> {
        vector_norms_with(&self.spectral, &s.u0)
    }
}

/// One recorded sample of a cell run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSample<T> {
    pub tau: T,
    pub mean_u: [T; 2],
    pub mean_theta: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanOdeReport<T> {
    /// Largest centered-difference residual of the mean equations
    /// `m_u₂' = gα m_θ − G₂`, `m_u₁' = −G₁`, `m_θ' = s m_u₂`.
    pub max_residual: T,
    pub max_abs_mean: T,
    pub samples: usize,
}

/// Checks recorded cell means against the mean ODE system. The recorded
/// samples are consecutive steps from τ = 0; the first window straddles the
/// Euler start-up step and is skipped when later windows exist.
pub fn cell_mean_ode_check<T: Real>(
    samples: &[MeanSample<T>],
    params: &CellParams<T>,
    forcing: [T; 2],
) -> Result<MeanOdeReport<T>, CellError> {
    if samples.len() < 3 {
        return Err(CellError::TooShort(samples.len()));
    }
    let mut res = T::zero();
    let skip = usize::from(samples.len() > 3);
    for w in samples.windows(3).skip(skip) {
        let (a, m, b) = (&w[0], &w[1], &w[2]);
        let h = b.tau - a.tau;
        let d = |x: T, y: T| (y - x) / h;
        let r1 = d(a.mean_u[0], b.mean_u[0]) + forcing[0];
        let r2 = d(a.mean_u[1], b.mean_u[1]) - (params.g_alpha * m.mean_theta - forcing[1]);
        let rt = d(a.mean_theta, b.mean_theta) - params.theta_source * m.mean_u[1];
        res = res.max(r1.magnitude()).max(r2.magnitude()).max(rt.magnitude());
    }
    let max_abs_mean = samples.iter().fold(T::zero(), |m, s| {
        m.max(s.mean_u[0].magnitude())
            .max(s.mean_u[1].magnitude())
            .max(s.mean_theta.magnitude())
    });
    Ok(MeanOdeReport {
        max_residual: res,
        max_abs_mean,
        samples: samples.len(),
    })
}

/// A global sample point with its lattice tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSample<T> {
    pub tag: (usize, usize),
    pub x: (T, T),
}

#[derive(Debug, Clone)]
pub struct CellFamilyConfig<T> {
    pub n: usize,
    pub params: CellParams<T>,
    pub dtau: T,
    pub tau_end: T,
    pub checkpoint_every: usize,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct CellTrajectory<T: Real> {
    pub sample: CellSample<T>,
    pub gradp0: [T; 2],
    pub taus: Vec<T>,
    pub u0: Vec<VectorField<T>>,
    pub theta0: Vec<ScalarField<T>>,
    /// Means after every step, including τ = 0.
    pub means: Vec<MeanSample<T>>,
    pub files: Vec<PathBuf>,
}

fn run_cell<T: Real>(
    cfg: &CellFamilyConfig<T>,
    sample: CellSample<T>,
    gradp0: [T; 2],
    init: &(dyn Fn(&CellSample<T>, &Grid<T>) -> (VectorField<T>, ScalarField<T>) + Sync),
) -> Result<CellTrajectory<T>, CellError> {
    let grid = Grid::unit_torus(cfg.n)?;
    let mut solver = CellSolver::new(grid, cfg.params)?;
    let (u, th) = init(&sample, &grid);
    let mut state = CellState::new(u, th, gradp0, sample.x)?;
    state.p1 = solver.recover_p1(&state);
    let steps = (cfg.tau_end / cfg.dtau).round().to_usize().unwrap_or(0);
    let every = cfg.checkpoint_every.max(1);
    let mut tr = CellTrajectory {
        sample,
        gradp0,
        taus: Vec::new(),
        u0: Vec::new(),
        theta0: Vec::new(),
        means: Vec::new(),
        files: Vec::new(),
    };
    let dir = match &cfg.out_dir {
        Some(d) => {
            let d = d.join(format!("cell_{}_{}", sample.tag.0, sample.tag.1));
            std::fs::create_dir_all(&d)?;
            Some(d)
        }
        None => None,
    };
    for n in 0..=steps {
        if n > 0 {
            solver.cell_step(&mut state, cfg.dtau)?;
        }
        let tau = cfg.dtau * T::from_usize_lossy(n);
        let (mu, mt) = state.means();
        tr.means.push(MeanSample {
            tau,
            mean_u: mu,
            mean_theta: mt,
        });
        if n % every == 0 || n == steps {
            if let Some(d) = &dir {
                let k = tr.taus.len();
                let tag = format!("{},{}", sample.tag.0, sample.tag.1);
                let pu = d.join(format!("u0_{k:04}.bhf"));
                Snapshot::vector("u0", tau, &state.u0)
                    .with_tag("xsample", &tag)
                    .save(&pu)?;
                let pt = d.join(format!("theta0_{k:04}.bhf"));
                Snapshot::scalar("theta0", tau, &state.theta0)
                    .with_tag("xsample", &tag)
                    .save(&pt)?;
                tr.files.push(pu);
                tr.files.push(pt);
            }
            tr.taus.push(tau);
            tr.u0.push(state.u0.clone());
            tr.theta0.push(state.theta0.clone());
        }
    }
    Ok(tr)
}

/// Independent cell runs, one per x-sample, in parallel.
pub fn solve_cell_family<T: Real>(
    samples: &[CellSample<T>],
    gradp0: &[[T; 2]],
    cfg: &CellFamilyConfig<T>,
    init: &(dyn Fn(&CellSample<T>, &Grid<T>) -> (VectorField<T>, ScalarField<T>) + Sync),
) -> Result<Vec<CellTrajectory<T>>, CellError> {
    if samples.len() != gradp0.len() {
        return Err(CellError::SampleMismatch {
            samples: samples.len(),
            forcing: gradp0.len(),
        });
    }
    samples
        .par_iter()
        .zip(gradp0.par_iter())
        .map(|(s, g)| run_cell(cfg, *s, *g, init))
        .collect()
}

/// Largest centered-difference divergence of the cell-mean velocity across
/// neighbouring samples of an `n1 × n2` lattice with spacings `(hx, hz)`,
/// at checkpoint `k`.
pub fn family_mean_divergence<T: Real>(
    family: &[CellTrajectory<T>],
    n1: usize,
    n2: usize,
    hx: T,
    hz: T,
    k: usize,
) -> T {
    let mean = |i: usize, j: usize| family[j * n1 + i].u0[k].mean();
    let mut worst = T::zero();
    for j in 1..n2.saturating_sub(1) {
        for i in 1..n1.saturating_sub(1) {
            let d = (mean(i + 1, j)[0] - mean(i - 1, j)[0]) / (T::lit(2.0) * hx)
                + (mean(i, j + 1)[1] - mean(i, j - 1)[1]) / (T::lit(2.0) * hz);
            worst = worst.max(d.magnitude());
        }
    }
    worst
}
