use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::Real;

use super::{Grid, GridKind};

/// Signed wavenumber index of FFT slot `m` for an `n`-point transform.
#[inline]
pub fn signed_mode(m: usize, n: usize) -> isize {
    if m <= n / 2 {
        m as isize
    } else {
        m as isize - n as isize
    }
}

/// Cached FFT plans and wavenumber tables for one grid.
///
/// Not shared between workers: every solver owns its own instance.
pub struct Spectral<T: Real> {
    grid: Grid<T>,
    fwd_x: Arc<dyn Fft<T>>,
    inv_x: Arc<dyn Fft<T>>,
    fwd_z: Option<Arc<dyn Fft<T>>>,
    inv_z: Option<Arc<dyn Fft<T>>>,
    /// Wavenumbers for first derivatives; the Nyquist slot is zero.
    kx_first: Vec<T>,
    kx_sq: Vec<T>,
    kz_first: Vec<T>,
    kz_sq: Vec<T>,
    keep_x: Vec<bool>,
    keep_z: Vec<bool>,
}

fn wavenumbers<T: Real>(n: usize, len: T) -> (Vec<T>, Vec<T>, Vec<bool>) {
    let base = T::two_pi() / len;
    let mut first = Vec::with_capacity(n);
    let mut sq = Vec::with_capacity(n);
    let mut keep = Vec::with_capacity(n);
    for m in 0..n {
        let s = signed_mode(m, n);
        let k = base * T::lit(s as f64);
        first.push(if 2 * m == n { T::zero() } else { k });
        sq.push(k * k);
        keep.push(3 * s.unsigned_abs() < n);
    }
    (first, sq, keep)
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: Grid<T>) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(grid.nx());
        let inv_x = planner.plan_fft_inverse(grid.nx());
        let (fwd_z, inv_z) = match grid.kind() {
            GridKind::Torus => (
                Some(planner.plan_fft_forward(grid.nz())),
                Some(planner.plan_fft_inverse(grid.nz())),
            ),
            GridKind::Box => (None, None),
        };
        let (kx_first, kx_sq, keep_x) = wavenumbers(grid.nx(), grid.lx());
        let (kz_first, kz_sq, keep_z) = match grid.kind() {
            GridKind::Torus => wavenumbers(grid.nz(), grid.lz()),
            GridKind::Box => (vec![], vec![], vec![true; grid.nz()]),
        };
        Self {
            grid,
            fwd_x,
            inv_x,
            fwd_z,
            inv_z,
            kx_first,
            kx_sq,
            kz_first,
            kz_sq,
            keep_x,
            keep_z,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    pub fn kx_first(&self) -> &[T] {
        &self.kx_first
    }
    pub fn kx_sq(&self) -> &[T] {
        &self.kx_sq
    }
    pub fn kz_first(&self) -> &[T] {
        &self.kz_first
    }
    pub fn kz_sq(&self) -> &[T] {
        &self.kz_sq
    }

    /// Row transforms along x, normalized so that slot 0 holds the row mean.
    pub fn forward_x(&self, f: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = f.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fwd_x.process(&mut buf);
        let s = T::one() / T::from_usize_lossy(self.grid.nx());
        for c in &mut buf {
            *c = *c * s;
        }
        buf
    }

    pub fn inverse_x(&self, mut buf: Vec<Complex<T>>) -> Vec<T> {
        self.inv_x.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn columns(&self, buf: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>, scale: T) {
        let (nx, nz) = (self.grid.nx(), self.grid.nz());
        let mut col = vec![Complex::new(T::zero(), T::zero()); nz * nx];
        for k in 0..nz {
            for m in 0..nx {
                col[m * nz + k] = buf[k * nx + m];
            }
        }
        plan.process(&mut col);
        for k in 0..nz {
            for m in 0..nx {
                buf[k * nx + m] = col[m * nz + k] * scale;
            }
        }
    }

    /// Full 2D transform (torus only). Slot `q*nx + m` holds mode `(m, q)`.
    pub fn forward_2d(&self, f: &[T]) -> Vec<Complex<T>> {
        let plan = self.fwd_z.as_ref().expect("2D transform requires a torus grid");
        let mut buf = self.forward_x(f);
        let s = T::one() / T::from_usize_lossy(self.grid.nz());
        self.columns(&mut buf, plan, s);
        buf
    }

    pub fn inverse_2d(&self, mut buf: Vec<Complex<T>>) -> Vec<T> {
        let plan = self.inv_z.as_ref().expect("2D transform requires a torus grid");
        self.columns(&mut buf, plan, T::one());
        self.inverse_x(buf)
    }

    /// Forward transform along every periodic direction of the grid.
    pub fn forward(&self, f: &[T]) -> Vec<Complex<T>> {
        match self.grid.kind() {
            GridKind::Torus => self.forward_2d(f),
            GridKind::Box => self.forward_x(f),
        }
    }

    pub fn inverse(&self, buf: Vec<Complex<T>>) -> Vec<T> {
        match self.grid.kind() {
            GridKind::Torus => self.inverse_2d(buf),
            GridKind::Box => self.inverse_x(buf),
        }
    }

    pub fn ddx(&self, f: &[T]) -> Vec<T> {
        let nx = self.grid.nx();
        let mut c = self.forward_x(f);
        for (n, v) in c.iter_mut().enumerate() {
            *v = *v * Complex::new(T::zero(), self.kx_first[n % nx]);
        }
        self.inverse_x(c)
    }

    pub fn ddz(&self, f: &[T]) -> Vec<T> {
        match self.grid.kind() {
            GridKind::Box => {
                let mut out = vec![T::zero(); f.len()];
                fd_ddz(f, &mut out, self.grid.nx(), self.grid.nz(), self.grid.dz());
                out
            }
            GridKind::Torus => {
                let nx = self.grid.nx();
                let mut c = self.forward_2d(f);
                for (n, v) in c.iter_mut().enumerate() {
                    *v = *v * Complex::new(T::zero(), self.kz_first[n / nx]);
                }
                self.inverse_2d(c)
            }
        }
    }

    /// Truncates modes outside the 2/3 band in every periodic direction.
    pub fn dealias(&self, f: &[T]) -> Vec<T> {
        let mut c = self.forward(f);
        self.dealias_modes(&mut c);
        self.inverse(c)
    }

    pub fn dealias_modes(&self, c: &mut [Complex<T>]) {
        let nx = self.grid.nx();
        let torus = self.grid.kind() == GridKind::Torus;
        for (n, v) in c.iter_mut().enumerate() {
            let keep = self.keep_x[n % nx] && (!torus || self.keep_z[n / nx]);
            if !keep {
                *v = Complex::new(T::zero(), T::zero());
            }
        }
    }
}

/// Second-order vertical derivative on wall-bounded rows: centered in the
/// interior, one-sided three-point at the walls. Works on real values and on
/// x-transformed complex coefficients alike.
pub fn fd_ddz<T, V>(f: &[V], out: &mut [V], nx: usize, nz: usize, dz: T)
where
    T: Real,
    V: Copy + std::ops::Add<Output = V> + std::ops::Sub<Output = V> + std::ops::Mul<T, Output = V>,
{
    let inv = T::one() / (T::lit(2.0) * dz);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    for i in 0..nx {
        let at = |k: usize| f[k * nx + i];
        out[i] = (at(1) * four - at(0) * three - at(2)) * inv;
        for k in 1..nz - 1 {
            out[k * nx + i] = (at(k + 1) - at(k - 1)) * inv;
        }
        let t = nz - 1;
        out[t * nx + i] = (at(t) * three - at(t - 1) * four + at(t - 2)) * inv;
    }
}
