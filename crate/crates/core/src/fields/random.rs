use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Real;

use super::{curl_of_stream, FieldError, Grid, GridKind, ScalarField, VectorField};

/// Random field with modes up to `kmax` in each direction and coefficients
/// damped like `1/(1+|k|²)`, reproducible from `seed`.
///
/// On a torus the field is zero-mean and fully periodic. On a box the
/// vertical modes are `sin(qπz/h)`, so the field vanishes on both walls.
pub fn random_band_limited<T: Real>(grid: Grid<T>, kmax: usize, seed: u64) -> ScalarField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let km = kmax as i64;
    let mut modes: Vec<(i64, i64, f64, f64)> = Vec::new();
    match grid.kind() {
        GridKind::Torus => {
            for m in -km..=km {
                for q in 0..=km {
                    if q == 0 && m <= 0 {
                        continue;
                    }
                    let d = 1.0 + (m * m + q * q) as f64;
                    modes.push((m, q, rng.gen_range(-1.0..1.0) / d, rng.gen_range(-1.0..1.0) / d));
                }
            }
        }
        GridKind::Box => {
            for m in 0..=km {
                for q in 1..=km {
                    let d = 1.0 + (m * m + q * q) as f64;
                    modes.push((m, q, rng.gen_range(-1.0..1.0) / d, rng.gen_range(-1.0..1.0) / d));
                }
            }
        }
    }
    let (lx, lz) = (grid.lx(), grid.lz());
    let tp = T::two_pi();
    let pi = T::lit(std::f64::consts::PI);
    let mut f = ScalarField::from_fn(grid, |x, z| {
        let mut v = T::zero();
        for &(m, q, a, b) in &modes {
            let (mf, qf) = (T::lit(m as f64), T::lit(q as f64));
            match grid.kind() {
                GridKind::Torus => {
                    let ph = tp * (mf * x / lx + qf * z / lz);
                    v += T::lit(a) * ph.cos() + T::lit(b) * ph.sin();
                }
                GridKind::Box => {
                    let ph = tp * mf * x / lx;
                    v += (T::lit(a) * ph.cos() + T::lit(b) * ph.sin()) * (qf * pi * z / lz).sin();
                }
            }
        }
        v
    });
    if grid.is_box() {
        f.zero_walls();
    }
    f
}

/// `∇×ψ` of a random band-limited stream function on a torus.
pub fn random_solenoidal<T: Real>(grid: Grid<T>, kmax: usize, seed: u64) -> Result<VectorField<T>, FieldError> {
    if grid.is_box() {
        return Err(FieldError::KindMismatch { expected: "torus" });
    }
    curl_of_stream(&random_band_limited(grid, kmax, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::divergence_defect;

    #[test]
    fn seeded_and_structured() {
        let g = Grid::unit_torus(32).unwrap();
        let a = random_band_limited::<f64>(g, 4, 7);
        assert_eq!(a, random_band_limited(g, 4, 7));
        assert_ne!(a, random_band_limited(g, 4, 8));
        assert!(a.mean().abs() < 1e-14);
        let u = random_solenoidal::<f64>(g, 4, 3).unwrap();
        assert!(divergence_defect(&u) < 1e-12);
        let b = Grid::new_box(16, 16, 2.0, 1.0).unwrap();
        let t = random_band_limited::<f64>(b, 3, 1);
        assert_eq!(t.wall_max_abs(), 0.0);
        assert!(t.max_abs() > 0.0);
        assert!(random_solenoidal::<f64>(b, 3, 1).is_err());
    }
}
