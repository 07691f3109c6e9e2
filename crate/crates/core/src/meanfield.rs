//! Global pressure, buoyancy projection, the time-integrated mean field and
//! the forced-Euler residual of the averaged flow.

use num_complex::Complex;
use thiserror::Error;

use crate::fields::{
    divergence_defect, divergence_with, gradient_with, leray_project_curl, leray_project_with, BoxPoisson, FieldError,
    Grid, GridKind, PoissonSolution, ScalarField, Spectral, VectorField,
};
use crate::homogenization::XLattice;
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeanFieldError {
    #[error("empty history")]
    EmptyHistory,
    #[error("need at least 3 checkpoints, got {0}")]
    TooFewCheckpoints(usize),
    #[error("histories have different lengths")]
    LengthMismatch,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Solves `Δp₀ = rhs` with homogeneous Neumann walls (box) or periodic
/// conditions (torus). The constant that makes the right side compatible is
/// removed and reported as `defect`; the solution has mean zero.
pub fn neumann_poisson<T: Real>(rhs: &ScalarField<T>) -> Result<PoissonSolution<T>, MeanFieldError> {
    rhs.ensure_finite()?;
    let g = *rhs.grid();
    let sol = match g.kind() {
        GridKind::Box => BoxPoisson::new(g)?.solve_neumann(rhs, None),
        GridKind::Torus => torus_poisson(rhs),
    };
    if sol.defect != T::zero() {
        log::debug!("neumann_poisson: removed compatibility defect {:e}", sol.defect);
    }
    Ok(sol)
}

fn torus_poisson<T: Real>(rhs: &ScalarField<T>) -> PoissonSolution<T> {
    let g = *rhs.grid();
    let sp = Spectral::new(g);
    let nx = g.nx();
    let mut c = sp.forward_2d(rhs.values());
    let defect = c[0].re;
    for (j, v) in c.iter_mut().enumerate() {
        let (kx, kz) = (sp.kx_first()[j % nx], sp.kz_first()[j / nx]);
        let k2 = kx * kx + kz * kz;
        *v = if k2 == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            *v / (-k2)
        };
    }
    let phi = ScalarField::from_vec(g, sp.inverse_2d(c)).expect("shape");
    PoissonSolution { phi, defect }
}

fn buoyancy<T: Real>(theta: &ScalarField<T>) -> VectorField<T> {
    VectorField::new(ScalarField::zeros(*theta.grid()), theta.clone()).expect("shared grid")
}

/// `H = π(e₂θ̄₀)`: on a box the potential carries `∂p₀/∂z = θ̄₀` on the
/// walls so that `H` has no normal flow; on a torus the spectral projector
/// is used and the mean of `e₂θ̄₀` passes through.
pub fn project_buoyancy<T: Real>(theta0_bar: &ScalarField<T>) -> Result<VectorField<T>, MeanFieldError> {
    theta0_bar.ensure_finite()?;
    let g = *theta0_bar.grid();
    let v = buoyancy(theta0_bar);
    Ok(match g.kind() {
        GridKind::Box => BoxPoisson::new(g)?.project(&v).0,
        GridKind::Torus => leray_project_with(&Spectral::new(g), &v),
    })
}

/// `e₂θ̄₀ − ∇p₀` with `p₀ = neumann_poisson(div e₂θ̄₀)`.
pub fn project_buoyancy_via_poisson<T: Real>(
    theta0_bar: &ScalarField<T>,
) -> Result<(VectorField<T>, ScalarField<T>), MeanFieldError> {
    let g = *theta0_bar.grid();
    let sp = Spectral::new(g);
    let v = buoyancy(theta0_bar);
    let p0 = neumann_poisson(&divergence_with(&sp, &v))?.phi;
    Ok((v.sub(&gradient_with(&sp, &p0)), p0))
}

/// `−∇×(Δ⁻¹(∇×e₂θ̄₀))` on a torus; annihilates the mean.
pub fn project_buoyancy_curl<T: Real>(theta0_bar: &ScalarField<T>) -> Result<VectorField<T>, MeanFieldError> {
    Ok(leray_project_curl(&buoyancy(theta0_bar))?)
}

/// Cumulative trapezoid integrals `∫₀^{τ_k} H ds` at uniform checkpoints.
pub fn mean_field_from_h<T: Real>(h: &[VectorField<T>], dtau: T) -> Result<Vec<VectorField<T>>, MeanFieldError> {
    let first = h.first().ok_or(MeanFieldError::EmptyHistory)?;
    let half = dtau / T::lit(2.0);
    let mut acc = VectorField::zeros(*first.grid());
    let mut out = vec![acc.clone()];
    for w in h.windows(2) {
        acc.axpy(half, &w[0]);
        acc.axpy(half, &w[1]);
        out.push(acc.clone());
    }
    Ok(out)
}

/// `ū₀(τ_k) = ∫₀^{τ_k} π(e₂θ̄₀)(s) ds` for every checkpoint.
pub fn mean_field<T: Real>(theta0_bar: &[ScalarField<T>], dtau: T) -> Result<Vec<VectorField<T>>, MeanFieldError> {
    if theta0_bar.is_empty() {
        return Err(MeanFieldError::EmptyHistory);
    }
    let h: Result<Vec<_>, _> = theta0_bar.iter().map(project_buoyancy).collect();
    mean_field_from_h(&h?, dtau)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanAdvection<T> {
    /// `∫_{T²} (u₀·∇_y)u₀ dy`.
    pub value: [T; 2],
    /// Relative divergence of the input; the identity needs it to vanish.
    pub divergence_defect: T,
}

/// Cell integral of the advection term of a periodic field.
pub fn mean_advection<T: Real>(u0: &VectorField<T>) -> Result<MeanAdvection<T>, MeanFieldError> {
    let g = *u0.grid();
    if g.is_box() {
        return Err(FieldError::KindMismatch { expected: "torus" }.into());
    }
    let sp = Spectral::new(g);
    let (u1, u2) = (u0.u1().values(), u0.u2().values());
    let mut value = [T::zero(); 2];
    for (c, f) in u0.components().iter().enumerate() {
        let fx = sp.ddx(f.values());
        let fz = sp.ddz(f.values());
        let adv: Vec<T> = (0..fx.len()).map(|n| u1[n] * fx[n] + u2[n] * fz[n]).collect();
        value[c] = ScalarField::from_vec(g, adv)?.integral();
    }
    Ok(MeanAdvection {
        value,
        divergence_defect: divergence_defect(u0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerResidual<T> {
    /// Checkpoint index of each entry (the first and last have no centered
    /// difference).
    pub index: Vec<usize>,
    /// `‖∂τū₀ + ū₀·∇ū₀ + ∇p̄₁ − π(e₂θ̄₀)‖_{L²}`.
    pub residual: Vec<T>,
    /// `‖ū₀·∇ū₀‖_{L²}`, the term whose derivation carries the consistency
    /// defect.
    pub advection: Vec<T>,
}

/// Forced-Euler residual with centered differences in τ.
pub fn euler_residual<T: Real>(
    u0_bar: &[VectorField<T>],
    p1_bar: &[ScalarField<T>],
    theta0_bar: &[ScalarField<T>],
    dtau: T,
) -> Result<EulerResidual<T>, MeanFieldError> {
    let n = u0_bar.len();
    if n < 3 {
        return Err(MeanFieldError::TooFewCheckpoints(n));
    }
    if p1_bar.len() != n || theta0_bar.len() != n {
        return Err(MeanFieldError::LengthMismatch);
    }
    let g = *u0_bar[0].grid();
    let sp = Spectral::new(g);
    let mut out = EulerResidual {
        index: Vec::new(),
        residual: Vec::new(),
        advection: Vec::new(),
    };
    for k in 1..n - 1 {
        let u = &u0_bar[k];
        let dudt = u0_bar[k + 1]
            .sub(&u0_bar[k - 1])
            .scaled(T::one() / (T::lit(2.0) * dtau));
        let mut adv = VectorField::zeros(g);
        for c in 0..2 {
            let f = u.component(c).values();
            let fx = sp.ddx(f);
            let fz = sp.ddz(f);
            let vals: Vec<T> = (0..f.len())
                .map(|j| u.u1().values()[j] * fx[j] + u.u2().values()[j] * fz[j])
                .collect();
            *adv.component_mut(c) = ScalarField::from_vec(g, vals)?;
        }
        let gp = gradient_with(&sp, &p1_bar[k]);
        let h = project_buoyancy(&theta0_bar[k])?;
        let r = dudt.add(&adv).add(&gp).sub(&h);
        out.index.push(k);
        out.residual.push(r.inner(&r).sqrt());
        out.advection.push(adv.inner(&adv).sqrt());
    }
    Ok(out)
}

/// Averaged temperature and its induced mean flow at one fast time.
#[derive(Debug, Clone)]
pub struct MeanFieldState<T: Real> {
    pub theta0_bar: ScalarField<T>,
    pub p0: ScalarField<T>,
    pub u0_bar: VectorField<T>,
    pub h: VectorField<T>,
    pub tau: T,
}

/// Builds the state at every checkpoint of a θ̄₀ history.
pub fn mean_field_states<T: Real>(
    theta0_bar: &[ScalarField<T>],
    dtau: T,
) -> Result<Vec<MeanFieldState<T>>, MeanFieldError> {
    let u = mean_field(theta0_bar, dtau)?;
    let mut out = Vec::with_capacity(u.len());
    for (k, (th, ub)) in theta0_bar.iter().zip(u).enumerate() {
        let (_, p0) = project_buoyancy_via_poisson(th)?;
        out.push(MeanFieldState {
            theta0_bar: th.clone(),
            p0,
            u0_bar: ub,
            h: project_buoyancy(th)?,
            tau: dtau * T::from_usize_lossy(k),
        });
    }
    Ok(out)
}

/// Bilinear interpolation of per-sample values on a midpoint lattice onto a
/// grid; periodic in x, clamped to the outermost samples in z.
pub fn interpolate_lattice<T: Real>(
    values: &[T],
    lattice: &XLattice<T>,
    grid: Grid<T>,
) -> Result<ScalarField<T>, MeanFieldError> {
    if values.len() != lattice.len() || lattice.is_empty() {
        return Err(MeanFieldError::LengthMismatch);
    }
    let (n1, n2) = (lattice.n1, lattice.n2);
    let hx = lattice.lx / T::from_usize_lossy(n1);
    let hz = lattice.lz / T::from_usize_lossy(n2);
    let half = T::lit(0.5);
    Ok(ScalarField::from_fn(grid, |x, z| {
        let sx = x / hx - half;
        let fx = sx.floor();
        let ax = sx - fx;
        let i0 = fx.to_isize().unwrap_or(0).rem_euclid(n1 as isize) as usize;
        let i1 = (i0 + 1) % n1;
        let sz = (z / hz - half).max(T::zero()).min(T::from_usize_lossy(n2 - 1));
        let fz = sz.floor();
        let az = sz - fz;
        let j0 = fz.to_usize().unwrap_or(0).min(n2 - 1);
        let j1 = (j0 + 1).min(n2 - 1);
        let v = |i: usize, j: usize| values[j * n1 + i];
        (T::one() - az) * ((T::one() - ax) * v(i0, j0) + ax * v(i1, j0))
            + az * ((T::one() - ax) * v(i0, j1) + ax * v(i1, j1))
    }))
}
