use num_complex::Complex;

use crate::Real;

use super::{BoxPoisson, FieldError, Grid, GridKind, NormReport, ScalarField, Spectral, VectorField};

fn wrap<T: Real>(g: Grid<T>, v: Vec<T>) -> ScalarField<T> {
    ScalarField::from_vec(g, v).expect("operator preserves shape")
}

/// `∇f`: spectral along periodic directions, centered differences along
/// the box vertical.
pub fn gradient<T: Real>(f: &ScalarField<T>) -> Result<VectorField<T>, FieldError> {
    f.ensure_finite()?;
    let sp = Spectral::new(*f.grid());
    Ok(gradient_with(&sp, f))
}

pub fn gradient_with<T: Real>(sp: &Spectral<T>, f: &ScalarField<T>) -> VectorField<T> {
    let g = *f.grid();
    VectorField::new(wrap(g, sp.ddx(f.values())), wrap(g, sp.ddz(f.values()))).expect("shared grid")
}

/// `∂₁u₁ + ∂₂u₂` with the stencils of [`gradient`].
pub fn divergence<T: Real>(u: &VectorField<T>) -> Result<ScalarField<T>, FieldError> {
    if !u.is_finite() {
        return Err(FieldError::NonFinite);
    }
    let sp = Spectral::new(*u.grid());
    Ok(divergence_with(&sp, u))
}

pub fn divergence_with<T: Real>(sp: &Spectral<T>, u: &VectorField<T>) -> ScalarField<T> {
    let a = sp.ddx(u.u1().values());
    let b = sp.ddz(u.u2().values());
    wrap(*u.grid(), a.into_iter().zip(b).map(|(p, q)| p + q).collect())
}

/// Two-dimensional curl `∂₁u₂ − ∂₂u₁`.
pub fn curl_scalar<T: Real>(u: &VectorField<T>) -> Result<ScalarField<T>, FieldError> {
    if !u.is_finite() {
        return Err(FieldError::NonFinite);
    }
    let sp = Spectral::new(*u.grid());
    Ok(curl_scalar_with(&sp, u))
}

pub fn curl_scalar_with<T: Real>(sp: &Spectral<T>, u: &VectorField<T>) -> ScalarField<T> {
    let a = sp.ddx(u.u2().values());
    let b = sp.ddz(u.u1().values());
    wrap(*u.grid(), a.into_iter().zip(b).map(|(p, q)| p - q).collect())
}

/// Velocity of a stream function: `∇×ψ = (∂₂ψ, −∂₁ψ)`.
pub fn curl_of_stream<T: Real>(psi: &ScalarField<T>) -> Result<VectorField<T>, FieldError> {
    let grad = gradient(psi)?;
    let [gx, gz] = grad.into_components();
    VectorField::new(gz, gx.scaled(-T::one()))
}

/// `div(grad f)`, composed from the first-derivative stencils.
pub fn laplacian<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>, FieldError> {
    f.ensure_finite()?;
    let sp = Spectral::new(*f.grid());
    Ok(divergence_with(&sp, &gradient_with(&sp, f)))
}

/// Norm bundle of a scalar or vector field.
pub trait Norms<T: Real> {
    fn norms(&self) -> NormReport<T>;
}

impl<T: Real> Norms<T> for ScalarField<T> {
    fn norms(&self) -> NormReport<T> {
        scalar_norms_with(&Spectral::new(*self.grid()), self)
    }
}

impl<T: Real> Norms<T> for VectorField<T> {
    fn norms(&self) -> NormReport<T> {
        vector_norms_with(&Spectral::new(*self.grid()), self)
    }
}

pub fn scalar_norms_with<T: Real>(sp: &Spectral<T>, f: &ScalarField<T>) -> NormReport<T> {
    let grad = gradient_with(sp, f);
    let l2 = f.inner(f).max(T::zero()).sqrt();
    let grad_l2 = grad.inner(&grad).max(T::zero()).sqrt();
    NormReport {
        l2,
        h1: (l2 * l2 + grad_l2 * grad_l2).sqrt(),
        linf: f.max_abs(),
        grad_l2,
    }
}

pub fn vector_norms_with<T: Real>(sp: &Spectral<T>, u: &VectorField<T>) -> NormReport<T> {
    let a = scalar_norms_with(sp, u.u1());
    let b = scalar_norms_with(sp, u.u2());
    let l2 = (a.l2 * a.l2 + b.l2 * b.l2).sqrt();
    let grad_l2 = (a.grad_l2 * a.grad_l2 + b.grad_l2 * b.grad_l2).sqrt();
    NormReport {
        l2,
        h1: (l2 * l2 + grad_l2 * grad_l2).sqrt(),
        linf: u.max_magnitude(),
        grad_l2,
    }
}

pub fn norms<T: Real, F: Norms<T>>(f: &F) -> NormReport<T> {
    f.norms()
}

/// L² norm over the nodes that carry equations: all nodes on a torus,
/// interior rows on a box (wall rows hold boundary conditions).
pub fn interior_l2<T: Real>(f: &ScalarField<T>) -> T {
    let g = f.grid();
    let mut acc = T::zero();
    for k in 0..g.nz() {
        if g.is_wall_row(k) {
            continue;
        }
        let row = (0..g.nx()).fold(T::zero(), |a, i| a + f.at(i, k) * f.at(i, k));
        acc += row * g.dz();
    }
    (acc * g.dx()).sqrt()
}

/// `‖div u‖ / ‖u‖_{H¹}`, with the divergence measured where it is imposed.
pub fn divergence_defect<T: Real>(u: &VectorField<T>) -> T {
    divergence_defect_with(&Spectral::new(*u.grid()), u)
}

pub fn divergence_defect_with<T: Real>(sp: &Spectral<T>, u: &VectorField<T>) -> T {
    let d = interior_l2(&divergence_with(sp, u));
    let h1 = vector_norms_with(sp, u).h1;
    if h1 == T::zero() {
        d
    } else {
        d / h1
    }
}

/// Spectral Leray projection of 2D-transformed components on a torus. The
/// zero mode is passed through; modes whose derivative wavenumber vanishes
/// (Nyquist) are left untouched.
pub fn leray_modes<T: Real>(sp: &Spectral<T>, a: &mut [Complex<T>], b: &mut [Complex<T>]) {
    let nx = sp.grid().nx();
    for n in 0..a.len() {
        let kx = sp.kx_first()[n % nx];
        let kz = sp.kz_first()[n / nx];
        let k2 = kx * kx + kz * kz;
        if k2 == T::zero() {
            continue;
        }
        let dot = (a[n] * kx + b[n] * kz) / k2;
        a[n] = a[n] - dot * kx;
        b[n] = b[n] - dot * kz;
    }
}

/// Projection onto the divergence-free part.
///
/// On a torus this is the spectral projector `v − ∇Δ⁻¹div v` and the mean
/// of `v` passes through unchanged. On a box the potential solves the
/// Neumann problem with `∂φ/∂z = v₂` on the walls, so the result has no
/// normal flow through them.
pub fn leray_project<T: Real>(v: &VectorField<T>) -> Result<VectorField<T>, FieldError> {
    if !v.is_finite() {
        return Err(FieldError::NonFinite);
    }
    let g = *v.grid();
    match g.kind() {
        GridKind::Torus => {
            let sp = Spectral::new(g);
            Ok(leray_project_with(&sp, v))
        }
        GridKind::Box => Ok(BoxPoisson::new(g)?.project(v).0),
    }
}

pub fn leray_project_with<T: Real>(sp: &Spectral<T>, v: &VectorField<T>) -> VectorField<T> {
    let g = *v.grid();
    let mut a = sp.forward_2d(v.u1().values());
    let mut b = sp.forward_2d(v.u2().values());
    leray_modes(sp, &mut a, &mut b);
    VectorField::new(wrap(g, sp.inverse_2d(a)), wrap(g, sp.inverse_2d(b))).expect("shared grid")
}

/// Inverse of `div∘grad` on a torus, defined on zero-mean fields; modes
/// where the symbol vanishes map to zero.
pub fn inverse_laplacian_torus<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>, FieldError> {
    let g = *f.grid();
    if g.kind() != GridKind::Torus {
        return Err(FieldError::KindMismatch { expected: "torus" });
    }
    let sp = Spectral::new(g);
    let nx = g.nx();
    let mut c = sp.forward_2d(f.values());
    for (n, v) in c.iter_mut().enumerate() {
        let kx = sp.kx_first()[n % nx];
        let kz = sp.kz_first()[n / nx];
        let k2 = kx * kx + kz * kz;
        *v = if k2 == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            *v / (-k2)
        };
    }
    Ok(wrap(g, sp.inverse_2d(c)))
}

/// The curl-inverse form of the projector, `−∇×(Δ⁻¹(∇×v))` (torus only).
/// It annihilates the mean, so it agrees with [`leray_project`] on
/// zero-mean fields.
pub fn leray_project_curl<T: Real>(v: &VectorField<T>) -> Result<VectorField<T>, FieldError> {
    if v.grid().kind() != GridKind::Torus {
        return Err(FieldError::KindMismatch { expected: "torus" });
    }
    let w = curl_scalar(v)?;
    let psi = inverse_laplacian_torus(&w)?;
    Ok(curl_of_stream(&psi)?.scaled(-T::one()))
}

/// Boundary conditions for the smallest eigenvalue of `−Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lambda1Bc {
    /// Dirichlet on all four sides of `[0,Lx]×[0,Lz]`.
    DirichletBox,
    /// Periodic in x, Dirichlet at the walls: the convection box.
    MixedBox,
    /// Periodic zero-mean fields on the torus.
    ZeroMeanTorus,
}

/// Poincaré constant `λ₁`.
pub fn poincare_lambda1<T: Real>(grid: &Grid<T>, bc: Lambda1Bc) -> T {
    let pi = T::PI();
    let (lx, lz) = (grid.lx(), grid.lz());
    match bc {
        Lambda1Bc::DirichletBox => pi * pi * (T::one() / (lx * lx) + T::one() / (lz * lz)),
        Lambda1Bc::MixedBox => pi * pi / (lz * lz),
        Lambda1Bc::ZeroMeanTorus => {
            let l = lx.max(lz);
            let k = T::two_pi() / l;
            k * k
        }
    }
}
