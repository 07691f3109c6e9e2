//! Pressure-type Poisson problems on the wall-bounded box.
//!
//! Fourier in x, and in z the square of the centered first-derivative
//! stencil, so that `divergence(gradient(φ))` is inverted exactly at every
//! interior node. Wall rows carry the Neumann data `∂φ/∂z = flux`.

use num_complex::Complex;

use crate::Real;

use super::linalg::DenseLu;
use super::spectral::{signed_mode, Spectral};
use super::{FieldError, Grid, ScalarField, VectorField};

type C<T> = Complex<T>;

fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Result of a Neumann solve.
#[derive(Debug, Clone)]
pub struct PoissonSolution<T> {
    /// Mean-zero solution.
    pub phi: ScalarField<T>,
    /// Constant removed from the right side to make it compatible.
    pub defect: T,
}

/// Factorized vertical operators, one per distinct `|kx|`.
pub struct BoxPoisson<T: Real> {
    grid: Grid<T>,
    spectral: Spectral<T>,
    /// Indexed by `|signed mode|`; `None` where the x-wavenumber vanishes.
    modes: Vec<Option<DenseLu<T>>>,
    /// Bordered operator for zero x-wavenumber: `[A e; wᵀ 0]`.
    zero_mode: DenseLu<T>,
}

/// Row-major matrix of the one-sided/centered first-derivative stencil.
pub fn dz_matrix<T: Real>(nz: usize, dz: T) -> Vec<T> {
    let mut d = vec![T::zero(); nz * nz];
    let inv = T::one() / (T::lit(2.0) * dz);
    d[0] = -T::lit(3.0) * inv;
    d[1] = T::lit(4.0) * inv;
    d[2] = -inv;
    for k in 1..nz - 1 {
        d[k * nz + k - 1] = -inv;
        d[k * nz + k + 1] = inv;
    }
    let t = nz - 1;
    d[t * nz + t] = T::lit(3.0) * inv;
    d[t * nz + t - 1] = -T::lit(4.0) * inv;
    d[t * nz + t - 2] = inv;
    d
}

fn neumann_operator<T: Real>(nz: usize, dz: T, ksq: T) -> Vec<T> {
    let d = dz_matrix(nz, dz);
    let mut a = vec![T::zero(); nz * nz];
    for r in 0..nz {
        if r == 0 || r + 1 == nz {
            a[r * nz..(r + 1) * nz].copy_from_slice(&d[r * nz..(r + 1) * nz]);
            continue;
        }
        for j in 0..nz {
            let mut s = T::zero();
            for m in 0..nz {
                s += d[r * nz + m] * d[m * nz + j];
            }
            a[r * nz + j] = s;
        }
        a[r * nz + r] -= ksq;
    }
    a
}

impl<T: Real> BoxPoisson<T> {
    pub fn new(grid: Grid<T>) -> Result<Self, FieldError> {
        if !grid.is_box() {
            return Err(FieldError::KindMismatch { expected: "box" });
        }
        let spectral = Spectral::new(grid);
        let (nx, nz, dz) = (grid.nx(), grid.nz(), grid.dz());
        let mut modes = Vec::with_capacity(nx / 2 + 1);
        for s in 0..=nx / 2 {
            let k = spectral.kx_first()[s];
            if k == T::zero() {
                modes.push(None);
            } else {
                modes.push(Some(DenseLu::factor(nz, neumann_operator(nz, dz, k * k))?));
            }
        }
        let a = neumann_operator(nz, dz, T::zero());
        let n1 = nz + 1;
        let mut b = vec![T::zero(); n1 * n1];
        for r in 0..nz {
            b[r * n1..r * n1 + nz].copy_from_slice(&a[r * nz..(r + 1) * nz]);
            if !grid.is_wall_row(r) {
                b[r * n1 + nz] = T::one();
            }
        }
        for j in 0..nz {
            b[nz * n1 + j] = grid.z_weight(j);
        }
        let zero_mode = DenseLu::factor(n1, b)?;
        Ok(Self {
            grid,
            spectral,
            modes,
            zero_mode,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn spectral(&self) -> &Spectral<T> {
        &self.spectral
    }

    fn mode_lu(&self, m: usize) -> Option<&DenseLu<T>> {
        let s = signed_mode(m, self.grid.nx()).unsigned_abs();
        self.modes[s].as_ref()
    }

    fn column(buf: &[C<T>], nx: usize, nz: usize, m: usize) -> Vec<C<T>> {
        (0..nz).map(|k| buf[k * nx + m]).collect()
    }

    /// Solves `div grad φ = rhs` at interior nodes with `∂φ/∂z = flux` on
    /// the walls. The zero-wavenumber mode is made compatible by removing a
    /// constant from the interior right side (reported as `defect`).
    pub fn solve_neumann(&self, rhs: &ScalarField<T>, flux: Option<(&[T], &[T])>) -> PoissonSolution<T> {
        let g = &self.grid;
        let (nx, nz) = (g.nx(), g.nz());
        let mut r = self.spectral.forward_x(rhs.values());
        let (bot, top) = match flux {
            Some((b, t)) => (self.spectral.forward_x(b), self.spectral.forward_x(t)),
            None => (vec![czero(); nx], vec![czero(); nx]),
        };
        for m in 0..nx {
            r[m] = bot[m];
            r[(nz - 1) * nx + m] = top[m];
        }
        let mut out = vec![czero(); nx * nz];
        let mut defect = T::zero();
        for m in 0..nx {
            let col = Self::column(&r, nx, nz, m);
            let sol = match self.mode_lu(m) {
                Some(lu) => lu.solve_complex(&col),
                None => {
                    let mut ext = col;
                    ext.push(czero());
                    let mut s = self.zero_mode.solve_complex(&ext);
                    let c = s.pop().expect("bordered solution carries the defect");
                    if m == 0 {
                        defect = c.re;
                    }
                    s
                }
            };
            for k in 0..nz {
                out[k * nx + m] = sol[k];
            }
        }
        let phi = ScalarField::from_vec(*g, self.spectral.inverse_x(out)).expect("shape preserved");
        PoissonSolution { phi, defect }
    }

    /// Potential of the x-transformed vector field `(v1, v2)`: returns `φ̂`
    /// with `div grad φ = div v` in the interior and `∂φ/∂z = v2` on the
    /// walls. Modes with zero x-wavenumber are integrated directly so that
    /// `∂φ/∂z = v2` holds at every interior node.
    pub fn potential_modes(&self, v1: &[C<T>], v2: &[C<T>]) -> Vec<C<T>> {
        let g = &self.grid;
        let (nx, nz) = (g.nx(), g.nz());
        let mut dv2 = vec![czero(); nx * nz];
        super::spectral::fd_ddz(v2, &mut dv2, nx, nz, g.dz());
        let mut out = vec![czero(); nx * nz];
        for m in 0..nx {
            let sol = match self.mode_lu(m) {
                Some(lu) => {
                    let ik = Complex::new(T::zero(), self.spectral.kx_first()[m]);
                    let col: Vec<C<T>> = (0..nz)
                        .map(|k| {
                            let n = k * nx + m;
                            if g.is_wall_row(k) {
                                v2[n]
                            } else {
                                v1[n] * ik + dv2[n]
                            }
                        })
                        .collect();
                    lu.solve_complex(&col)
                }
                None => self.integrate_dz(&Self::column(v2, nx, nz, m)),
            };
            for k in 0..nz {
                out[k * nx + m] = sol[k];
            }
        }
        out
    }

    /// Solves the centered relation `(p[k+1]-p[k-1])/(2dz) = g[k]` exactly
    /// at interior nodes; the odd/even offset is fitted to the wall rows in
    /// least squares and the result has zero trapezoid mean.
    pub fn integrate_dz(&self, g: &[C<T>]) -> Vec<C<T>> {
        let grid = &self.grid;
        let nz = grid.nz();
        let dz = grid.dz();
        let two_dz = T::lit(2.0) * dz;
        let mut p = vec![czero(); nz];
        for k in 1..nz - 1 {
            p[k + 1] = p[k - 1] + g[k] * two_dz;
        }
        let inv = T::one() / two_dz;
        let t = nz - 1;
        let r0 = (p[1] * T::lit(4.0) - p[0] * T::lit(3.0) - p[2]) * inv - g[0];
        let rt = (p[t] * T::lit(3.0) - p[t - 1] * T::lit(4.0) + p[t - 2]) * inv - g[t];
        // Adding α on even nodes shifts both wall residuals by -2α/dz.
        let alpha = (r0 + rt) * (dz / T::lit(4.0));
        for (k, v) in p.iter_mut().enumerate() {
            if k % 2 == 0 {
                *v = *v + alpha;
            }
        }
        let h = grid.lz();
        let mean = (0..nz).fold(czero(), |a, k| a + p[k] * grid.z_weight(k)) / h;
        p.iter().map(|&v| v - mean).collect()
    }

    /// Gradient of x-transformed `φ̂`, returned in mode space.
    pub fn gradient_modes(&self, phi: &[C<T>]) -> (Vec<C<T>>, Vec<C<T>>) {
        let g = &self.grid;
        let (nx, nz) = (g.nx(), g.nz());
        let g1: Vec<C<T>> = phi
            .iter()
            .enumerate()
            .map(|(n, &v)| v * Complex::new(T::zero(), self.spectral.kx_first()[n % nx]))
            .collect();
        let mut g2 = vec![czero(); nx * nz];
        super::spectral::fd_ddz(phi, &mut g2, nx, nz, g.dz());
        (g1, g2)
    }

    /// In-place projection of x-transformed velocity onto the discretely
    /// divergence-free fields with no normal flow through the walls.
    /// Returns the potential `φ̂` of the removed gradient part.
    pub fn project_modes(&self, v1: &mut [C<T>], v2: &mut [C<T>]) -> Vec<C<T>> {
        let g = &self.grid;
        let (nx, nz) = (g.nx(), g.nz());
        let phi = self.potential_modes(v1, v2);
        let (g1, g2) = self.gradient_modes(&phi);
        for m in 0..nx {
            let zero_k = self.spectral.kx_first()[m] == T::zero();
            for k in 0..nz {
                let n = k * nx + m;
                if zero_k {
                    v2[n] = czero();
                } else {
                    v1[n] = v1[n] - g1[n];
                    v2[n] = v2[n] - g2[n];
                }
            }
        }
        phi
    }

    /// Physical-space wrapper of [`BoxPoisson::project_modes`].
    pub fn project(&self, v: &VectorField<T>) -> (VectorField<T>, ScalarField<T>) {
        let g = *v.grid();
        let mut a = self.spectral.forward_x(v.u1().values());
        let mut b = self.spectral.forward_x(v.u2().values());
        let phi = self.project_modes(&mut a, &mut b);
        let w1 = ScalarField::from_vec(g, self.spectral.inverse_x(a)).expect("shape");
        let w2 = ScalarField::from_vec(g, self.spectral.inverse_x(b)).expect("shape");
        let phi = ScalarField::from_vec(g, self.spectral.inverse_x(phi)).expect("shape");
        (VectorField::new(w1, w2).expect("shared grid"), phi)
    }

    /// Mean-zero potential `φ` whose gradient is the gradient part of `f`.
    pub fn potential(&self, f: &VectorField<T>) -> ScalarField<T> {
        let a = self.spectral.forward_x(f.u1().values());
        let b = self.spectral.forward_x(f.u2().values());
        let phi = self.potential_modes(&a, &b);
        ScalarField::from_vec(*f.grid(), self.spectral.inverse_x(phi)).expect("shape")
    }
}
