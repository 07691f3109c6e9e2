use num_complex::Complex;

use crate::fields::linalg::solve_tridiagonal;
use crate::fields::{
    divergence_defect_with, scalar_norms_with, vector_norms_with, BoxPoisson, FieldError, Grid, ScalarField, Spectral,
    VectorField,
};
use crate::Real;

use super::{t_from_theta, Diagnostics, PhysicalParams, SolverError, SolverState};

type C<T> = Complex<T>;

fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Explicit right sides in x-mode space.
struct Explicit<T> {
    n1: Vec<C<T>>,
    n2: Vec<C<T>>,
    nt: Vec<C<T>>,
    dt: T,
}

/// IMEX integrator on the box: Adams-Bashforth 2 for advection, buoyancy
/// and the θ source, Crank-Nicolson for diffusion, then an incremental
/// pressure correction. The first step after construction or
/// [`BoxSolver::reset`] uses forward Euler for the explicit part.
pub struct BoxSolver<T: Real> {
    params: PhysicalParams<T>,
    gamma: T,
    theta_source: bool,
    cfl_limit: T,
    poisson: BoxPoisson<T>,
    prev: Option<Explicit<T>>,
}

impl<T: Real> BoxSolver<T> {
    pub fn new(grid: Grid<T>, params: PhysicalParams<T>) -> Result<Self, SolverError> {
        params.validate()?;
        if (grid.lz() - params.h).magnitude() > T::lit(1e-12) * params.h {
            return Err(SolverError::InvalidParams("grid height differs from h".into()));
        }
        Ok(BoxSolver {
            params,
            gamma: T::lit(1.5),
            theta_source: true,
            cfl_limit: T::one(),
            poisson: BoxPoisson::new(grid)?,
            prev: None,
        })
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    /// Switches the `(T1 − T2)/h · u₂` term of the θ equation on or off.
    pub fn with_theta_source(mut self, on: bool) -> Self {
        self.theta_source = on;
        self
    }

    pub fn with_cfl_limit(mut self, limit: T) -> Self {
        self.cfl_limit = limit;
        self
    }

    pub fn params(&self) -> &PhysicalParams<T> {
        &self.params
    }

    pub fn grid(&self) -> &Grid<T> {
        self.poisson.grid()
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    fn spectral(&self) -> &Spectral<T> {
        self.poisson.spectral()
    }

    /// Forgets the Adams-Bashforth history.
    pub fn reset(&mut self) {
        self.prev = None;
    }

    /// `(ε^γ ν, ε^γ κ)`.
    pub fn diffusivities(&self, eps: T) -> (T, T) {
        let s = eps.powf(self.gamma);
        (s * self.params.nu, s * self.params.kappa)
    }

    pub fn cfl(&self, u: &VectorField<T>, dt: T) -> T {
        let g = self.grid();
        let (dx, dz) = (g.dx(), g.dz());
        let a = u.u1().values().iter().zip(u.u2().values());
        a.fold(T::zero(), |m, (&p, &q)| m.max(p.magnitude() / dx + q.magnitude() / dz)) * dt
    }

    /// Time step giving the target CFL number, capped at `dt_max`.
    pub fn stable_dt(&self, u: &VectorField<T>, cfl_target: T, dt_max: T) -> T {
        let c = self.cfl(u, T::one());
        if c > T::zero() {
            (cfl_target / c).min(dt_max)
        } else {
            dt_max
        }
    }

    fn check_grid(&self, state: &SolverState<T>) -> Result<(), SolverError> {
        if state.u.grid() != self.grid() || state.theta.grid() != self.grid() {
            return Err(FieldError::GridMismatch.into());
        }
        Ok(())
    }

    fn field(&self, v: Vec<T>) -> ScalarField<T> {
        ScalarField::from_vec(*self.grid(), v).expect("solver grid")
    }

    /// Dealiased `(u·∇)f` in physical space.
    fn advect(&self, u1: &[T], u2: &[T], f: &[T]) -> Vec<T> {
        let sp = self.spectral();
        let fd = sp.dealias(f);
        let fx = sp.ddx(&fd);
        let fz = sp.ddz(&fd);
        let prod: Vec<T> = (0..f.len()).map(|n| u1[n] * fx[n] + u2[n] * fz[n]).collect();
        sp.dealias(&prod)
    }

    /// Dealiased `(u·∇)u`.
    pub fn advection_term(&self, u: &VectorField<T>) -> VectorField<T> {
        let sp = self.spectral();
        let u1 = sp.dealias(u.u1().values());
        let u2 = sp.dealias(u.u2().values());
        let a1 = self.advect(&u1, &u2, u.u1().values());
        let a2 = self.advect(&u1, &u2, u.u2().values());
        VectorField::new(self.field(a1), self.field(a2)).expect("solver grid")
    }

    /// Compact `∂xx + ∂zz`: spectral in x, three-point in z, one-sided
    /// four-point on the wall rows.
    pub fn compact_laplacian(&self, f: &[T]) -> Vec<T> {
        let g = self.grid();
        let sp = self.spectral();
        let (nx, nz) = (g.nx(), g.nz());
        let mut c = sp.forward_x(f);
        for (n, v) in c.iter_mut().enumerate() {
            *v = *v * (-sp.kx_sq()[n % nx]);
        }
        let mut out = sp.inverse_x(c);
        let idz2 = T::one() / (g.dz() * g.dz());
        let at = |i: usize, k: usize| f[k * nx + i];
        for i in 0..nx {
            for k in 0..nz {
                let d2 = if k == 0 {
                    T::lit(2.0) * at(i, 0) - T::lit(5.0) * at(i, 1) + T::lit(4.0) * at(i, 2) - at(i, 3)
                } else if k == nz - 1 {
                    T::lit(2.0) * at(i, k) - T::lit(5.0) * at(i, k - 1) + T::lit(4.0) * at(i, k - 2) - at(i, k - 3)
                } else {
                    at(i, k + 1) - T::lit(2.0) * at(i, k) + at(i, k - 1)
                };
                out[k * nx + i] += d2 * idz2;
            }
        }
        out
    }

    fn explicit_terms(&self, state: &SolverState<T>) -> (Vec<T>, Vec<T>, Vec<T>) {
        let sp = self.spectral();
        let u1 = sp.dealias(state.u.u1().values());
        let u2 = sp.dealias(state.u.u2().values());
        let ga = self.params.g_alpha;
        let th = state.theta.values();
        let a1 = self.advect(&u1, &u2, state.u.u1().values());
        let a2 = self.advect(&u1, &u2, state.u.u2().values());
        let at = self.advect(&u1, &u2, th);
        let s = if self.theta_source {
            self.params.source()
        } else {
            T::zero()
        };
        let raw_u2 = state.u.u2().values();
        let n1 = a1.iter().map(|&v| -v).collect();
        let n2 = a2.iter().zip(th).map(|(&v, &t)| ga * t - v).collect();
        let nt = (0..th.len()).map(|n| s * raw_u2[n] - at[n]).collect();
        (n1, n2, nt)
    }

    /// Mean-zero pressure of the current state: the potential of
    /// `−(u·∇)u + ε^γνΔu + gα e₂θ`, with the normal component of that force
    /// as Neumann data on the walls.
    pub fn recover_pressure(&self, state: &SolverState<T>) -> Result<ScalarField<T>, SolverError> {
        self.check_grid(state)?;
        let (n1, n2, _) = self.explicit_terms(state);
        let (d_u, _) = self.diffusivities(state.eps);
        let l1 = self.compact_laplacian(state.u.u1().values());
        let l2 = self.compact_laplacian(state.u.u2().values());
        let f1: Vec<T> = n1.iter().zip(&l1).map(|(&a, &b)| a + d_u * b).collect();
        let f2: Vec<T> = n2.iter().zip(&l2).map(|(&a, &b)| a + d_u * b).collect();
        let f = VectorField::new(self.field(f1), self.field(f2))?;
        let mut p = self.poisson.potential(&f);
        p.remove_mean();
        Ok(p)
    }

    /// Sets the pressure from the state, clears the AB2 history and records
    /// the initial diagnostics row.
    pub fn initialize(&mut self, state: &mut SolverState<T>) -> Result<(), SolverError> {
        self.reset();
        state.p = self.recover_pressure(state)?;
        state.history.clear();
        let d = self.diagnostics(state, T::zero());
        state.history.push(d);
        Ok(())
    }

    /// Crank-Nicolson solve per x-mode with homogeneous Dirichlet walls.
    fn cn_solve(&self, f: &[C<T>], diff: T, dt: T, rhs_extra: &[C<T>]) -> Vec<C<T>> {
        let g = self.grid();
        let sp = self.spectral();
        let (nx, nz) = (g.nx(), g.nz());
        let idz2 = T::one() / (g.dz() * g.dz());
        let half = dt * diff / T::lit(2.0);
        let m_int = nz - 2;
        let mut out = vec![czero(); nx * nz];
        let off = vec![-half * idz2; m_int];
        for m in 0..nx {
            let kx2 = sp.kx_sq()[m];
            let diag = vec![T::one() + half * (T::lit(2.0) * idz2 + kx2); m_int];
            let mut rhs: Vec<C<T>> = (1..nz - 1)
                .map(|k| {
                    let n = k * nx + m;
                    let lap = (f[n + nx] - f[n] * T::lit(2.0) + f[n - nx]) * idz2 - f[n] * kx2;
                    f[n] + lap * half + rhs_extra[n] * dt
                })
                .collect();
            solve_tridiagonal(&off, &diag, &off, &mut rhs);
            for (j, v) in rhs.into_iter().enumerate() {
                out[(j + 1) * nx + m] = v;
            }
        }
        out
    }

    /// Advances `state` by `dt`. On error the state is left untouched.
    pub fn step(&mut self, state: &mut SolverState<T>, dt: T) -> Result<(), SolverError> {
        self.check_grid(state)?;
        if !(dt > T::zero()) {
            return Err(SolverError::InvalidParams("dt must be positive".into()));
        }
        let cfl = self.cfl(&state.u, dt);
        if cfl > self.cfl_limit {
            return Err(SolverError::Cfl {
                cfl: cfl.as_f64(),
                limit: self.cfl_limit.as_f64(),
            });
        }
        let sp = self.spectral();
        let (d_u, d_t) = self.diffusivities(state.eps);
        let (n1, n2, nt) = self.explicit_terms(state);
        let ex = Explicit {
            n1: sp.forward_x(&n1),
            n2: sp.forward_x(&n2),
            nt: sp.forward_x(&nt),
            dt,
        };
        let combine = |cur: &[C<T>], old: Option<&[C<T>]>| -> Vec<C<T>> {
            match (old, &self.prev) {
                (Some(o), Some(p)) => {
                    let r = dt / p.dt;
                    let (a, b) = (T::one() + r / T::lit(2.0), -r / T::lit(2.0));
                    cur.iter().zip(o).map(|(&c, &o)| c * a + o * b).collect()
                }
                _ => cur.to_vec(),
            }
        };
        let p_hat = sp.forward_x(state.p.values());
        let (gp1, gp2) = self.poisson.gradient_modes(&p_hat);
        let mut f1 = combine(&ex.n1, self.prev.as_ref().map(|p| p.n1.as_slice()));
        let mut f2 = combine(&ex.n2, self.prev.as_ref().map(|p| p.n2.as_slice()));
        let ft = combine(&ex.nt, self.prev.as_ref().map(|p| p.nt.as_slice()));
        for n in 0..f1.len() {
            f1[n] = f1[n] - gp1[n];
            f2[n] = f2[n] - gp2[n];
        }
        let mut v1 = self.cn_solve(&sp.forward_x(state.u.u1().values()), d_u, dt, &f1);
        let mut v2 = self.cn_solve(&sp.forward_x(state.u.u2().values()), d_u, dt, &f2);
        let th = self.cn_solve(&sp.forward_x(state.theta.values()), d_t, dt, &ft);
        let phi = self.poisson.project_modes(&mut v1, &mut v2);
        let p_new: Vec<C<T>> = p_hat.iter().zip(&phi).map(|(&p, &f)| p + f / dt).collect();

        let mut u1 = self.field(sp.inverse_x(v1));
        let mut u2 = self.field(sp.inverse_x(v2));
        let mut theta = self.field(sp.inverse_x(th));
        let mut p = self.field(sp.inverse_x(p_new));
        u1.zero_walls();
        u2.zero_walls();
        theta.zero_walls();
        p.remove_mean();
        if !(u1.is_finite() && u2.is_finite() && theta.is_finite() && p.is_finite()) {
            return Err(SolverError::NonFinite {
                step: state.history.len(),
                t: state.t.as_f64(),
                last_good: None,
            });
        }
        state.u = VectorField::new(u1, u2)?;
        state.theta = theta;
        state.p = p;
        state.t += dt;
        self.prev = Some(ex);
        let d = self.diagnostics(state, dt);
        state.history.push(d);
        Ok(())
    }

    pub fn diagnostics(&self, state: &SolverState<T>, dt: T) -> Diagnostics<T> {
        let sp = self.spectral();
        let temp = t_from_theta(&state.theta, &self.params).expect("box grid");
        Diagnostics {
            t: state.t,
            dt,
            u: vector_norms_with(sp, &state.u),
            theta: scalar_norms_with(sp, &state.theta),
            theta_max: state.theta.max(),
            theta_min: state.theta.min(),
            temp_min: temp.min(),
            temp_max: temp.max(),
            cfl: self.cfl(&state.u, dt),
            energy_input: self.params.g_alpha * state.theta.inner(state.u.u2()),
            div_defect: divergence_defect_with(sp, &state.u),
        }
    }
}
