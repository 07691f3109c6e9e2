use num_complex::Complex;

use crate::Real;

use super::spectral::signed_mode;
use super::{FieldError, Grid, GridKind, ScalarField, Spectral};

/// Target slots of old slot `m` when an `n`-point spectrum is padded to `big`
/// points; the Nyquist coefficient is split evenly between `±n/2`.
fn pad_slots(m: usize, n: usize, big: usize) -> [(usize, f64); 2] {
    if 2 * m == n {
        [(n / 2, 0.5), (big - n / 2, 0.5)]
    } else {
        let s = signed_mode(m, n);
        [((s.rem_euclid(big as isize)) as usize, 1.0), (0, 0.0)]
    }
}

/// Trigonometric interpolation onto a grid refined by `rx` in x and `rz` in
/// z. Only periodic directions can be refined, so a box needs `rz = 1`.
pub fn upsample<T: Real>(f: &ScalarField<T>, rx: usize, rz: usize) -> Result<ScalarField<T>, FieldError> {
    let g = *f.grid();
    if rx == 0 || rz == 0 {
        return Err(FieldError::GridTooSmall { n: 0, min: 1 });
    }
    if g.is_box() && rz != 1 {
        return Err(FieldError::KindMismatch { expected: "torus" });
    }
    if rx == 1 && rz == 1 {
        return Ok(f.clone());
    }
    let (nx, nz) = (g.nx(), g.nz());
    let (bx, bz) = (nx * rx, nz * rz);
    let fine = Grid::new(g.kind(), bx, bz, g.lx(), g.lz())?;
    let sp = Spectral::new(g);
    let big = Spectral::new(fine);
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; bx * bz];
    match g.kind() {
        GridKind::Box => {
            let c = sp.forward_x(f.values());
            for k in 0..nz {
                for m in 0..nx {
                    for (slot, w) in pad_slots(m, nx, bx) {
                        if w > 0.0 {
                            out[k * bx + slot] += c[k * nx + m] * T::lit(w);
                        }
                    }
                }
            }
            Ok(ScalarField::from_vec(fine, big.inverse_x(out))?)
        }
        GridKind::Torus => {
            let c = sp.forward_2d(f.values());
            for q in 0..nz {
                for m in 0..nx {
                    for (sz, wz) in pad_slots(q, nz, bz) {
                        for (sx, wx) in pad_slots(m, nx, bx) {
                            if wx > 0.0 && wz > 0.0 {
                                out[sz * bx + sx] += c[q * nx + m] * T::lit(wx * wz);
                            }
                        }
                    }
                }
            }
            Ok(ScalarField::from_vec(fine, big.inverse_2d(out))?)
        }
    }
}
