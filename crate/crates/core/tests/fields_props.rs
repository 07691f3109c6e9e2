use std::f64::consts::PI;

use benard_core::fields::{
    curl_of_stream, divergence, divergence_defect, gradient, leray_project, Grid, Norms, ScalarField,
};
use proptest::prelude::*;

/// Band-limited trigonometric field with coefficients drawn from `c`.
fn band_limited(g: Grid<f64>, c: &[f64], kmax: usize) -> ScalarField<f64> {
    let (lx, lz) = (g.lx(), g.lz());
    ScalarField::from_fn(g, |x, z| {
        let mut s = 0.0;
        let mut it = c.iter().cycle();
        for a in 0..=kmax {
            for b in 0..=kmax {
                let (p, q) = (2.0 * PI * a as f64 * x / lx, 2.0 * PI * b as f64 * z / lz);
                s += it.next().unwrap() * (p + q).cos() + it.next().unwrap() * (p - q).sin();
            }
        }
        s
    })
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 50)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn curl_fields_are_divergence_free(c in coeffs()) {
        let g = Grid::new_torus(32, 32, 1.0, 1.0).unwrap();
        let u = curl_of_stream(&band_limited(g, &c, 4)).unwrap();
        let scale = u.max_magnitude().max(1.0);
        prop_assert!(divergence(&u).unwrap().max_abs() / scale < 1e-10);
    }

    #[test]
    fn torus_projection_is_idempotent_and_orthogonal(c in coeffs(), d in coeffs()) {
        let g = Grid::new_torus(32, 16, 2.0, 1.0).unwrap();
        let v = benard_core::fields::VectorField::new(band_limited(g, &c, 3), band_limited(g, &d, 3)).unwrap();
        let p = leray_project(&v).unwrap();
        let pp = leray_project(&p).unwrap();
        prop_assert!(pp.sub(&p).max_magnitude() < 1e-10 * v.max_magnitude().max(1.0));
        let r = v.sub(&p);
        let rel = r.inner(&p).abs() / v.inner(&v).max(1e-300);
        prop_assert!(rel < 1e-8);
        prop_assert!(divergence_defect(&p) < 1e-10);
    }

    #[test]
    fn box_projection_is_idempotent(c in coeffs(), d in coeffs()) {
        let g = Grid::new_box(32, 24, 2.0, 1.0).unwrap();
        let v = benard_core::fields::VectorField::new(band_limited(g, &c, 2), band_limited(g, &d, 2)).unwrap();
        let p = leray_project(&v).unwrap();
        prop_assert!(divergence_defect(&p) < 1e-10);
        prop_assert!(p.u2().wall_max_abs() < 1e-12);
        let pp = leray_project(&p).unwrap();
        prop_assert!(pp.sub(&p).max_magnitude() < 1e-10 * v.max_magnitude().max(1.0));
    }

    #[test]
    fn integration_by_parts_on_torus(c in coeffs(), d in coeffs(), e in coeffs()) {
        let g = Grid::new_torus(32, 32, 1.0, 1.0).unwrap();
        let f = band_limited(g, &c, 4);
        let u = benard_core::fields::VectorField::new(band_limited(g, &d, 4), band_limited(g, &e, 4)).unwrap();
        let lhs = gradient(&f).unwrap().inner(&u);
        let rhs = -f.inner(&divergence(&u).unwrap());
        let scale = f.norms().h1 * u.norms().h1;
        prop_assert!((lhs - rhs).abs() <= 1e-8 * scale.max(1e-300));
    }

    #[test]
    fn l2_norm_is_stable_under_refinement(c in coeffs()) {
        let g = Grid::new_torus(16, 16, 1.0, 1.0).unwrap();
        let a = band_limited(g, &c, 3).norms().l2;
        let b = band_limited(g.refined().unwrap(), &c, 3).norms().l2;
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1e-300));
        let gb = Grid::new_box(16, 64, 1.0, 1.0).unwrap();
        let a = band_limited(gb, &c, 1).norms().l2;
        let b = band_limited(gb.refined().unwrap().refined().unwrap(), &c, 1).norms().l2;
        prop_assert!((a - b).abs() <= 1e-2 * a.max(1e-300));
    }

    #[test]
    fn scaled_poincare_constant_is_uniform(c in coeffs()) {
        // w is zero-mean and periodic on the unit cell; u(x) = w(x/ε).
        let mut ratios = Vec::new();
        for inv_eps in [4.0, 8.0, 16.0] {
            let g = Grid::new_torus(128, 128, 1.0, 1.0).unwrap();
            let cell = Grid::new_torus(8, 8, 1.0, 1.0).unwrap();
            let w = band_limited(cell, &c, 2);
            let wm = w.mean();
            let u = ScalarField::from_fn(g, |x, z| {
                let s = band_limited_point(&c, 2, x * inv_eps, z * inv_eps);
                s - wm
            });
            let n = u.norms();
            prop_assume!(n.grad_l2 > 1e-6);
            ratios.push(n.l2 / n.grad_l2 * inv_eps);
        }
        prop_assert!(ratios[1] <= ratios[0] * 1.05 && ratios[2] <= ratios[0] * 1.05);
    }
}

fn band_limited_point(c: &[f64], kmax: usize, x: f64, z: f64) -> f64 {
    let mut s = 0.0;
    let mut it = c.iter().cycle();
    for a in 0..=kmax {
        for b in 0..=kmax {
            let (p, q) = (2.0 * PI * a as f64 * x, 2.0 * PI * b as f64 * z);
            s += it.next().unwrap() * (p + q).cos() + it.next().unwrap() * (p - q).sin();
        }
    }
    s
}
