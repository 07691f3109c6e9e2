use std::f64::consts::PI;

use benard_core::fields::{Grid, ScalarField};
use benard_core::homogenization::{
    cell_average, least_squares_order, limit_pairing, pairing, pairing_with, parse_phi_file, two_scale_error_sweep,
    weak_pairing, Envelope, HomogenizationError, ScalarTrajectory, Target, TestFunction, TwoScaleField, XLattice,
    YProfile,
};
use proptest::prelude::*;

fn boxg(nx: usize, nz: usize) -> Grid<f64> {
    Grid::new_box(nx, nz, 1.0, 1.0).unwrap()
}

fn chi() -> Envelope<f64> {
    Envelope::gaussian(0.5, 0.5, 0.15)
}

fn single(eps: f64, f: ScalarField<f64>) -> ScalarTrajectory<f64> {
    ScalarTrajectory::new(eps, vec![0.0], vec![f]).unwrap()
}

#[test]
fn oscillation_squared_pairs_to_one_half() {
    let eps = 1.0 / 16.0;
    let g = boxg(256, 128);
    let c = chi();
    let u = ScalarField::from_fn(g, |x, z| c.value(x, z) * (2.0 * PI * x / eps).cos());
    let phi = TestFunction::new(Target::U1, c, YProfile::Cos(1, 0));
    let got = pairing(&single(eps, u), &phi, eps).unwrap();
    // ∫χ² by a fine midpoint rule
    let n = 800;
    let h = 1.0 / n as f64;
    let mut chi2 = 0.0;
    for i in 0..n {
        for k in 0..n {
            chi2 += c.value((i as f64 + 0.5) * h, (k as f64 + 0.5) * h).powi(2) * h * h;
        }
    }
    assert!((got - 0.5 * chi2).abs() < 0.05 * 0.5 * chi2, "{got} vs {}", 0.5 * chi2);
}

#[test]
fn y_independent_test_function_gives_the_weak_pairing() {
    let eps = 0.125;
    let g = boxg(64, 32);
    let u = ScalarField::from_fn(g, |x, z| (2.0 * PI * x / eps).sin() + z * z);
    let tr = ScalarTrajectory::new(eps, vec![0.0, 0.1, 0.2], vec![u.clone(), u.scaled(2.0), u.scaled(0.5)]).unwrap();
    let phi = TestFunction::new(Target::U2, chi(), YProfile::Const).with_tau_pow(1);
    let a = pairing(&tr, &phi, eps).unwrap();
    let b = weak_pairing(&tr, &phi);
    assert!((a - b).abs() < 1e-14);
    assert!(matches!(
        pairing(&tr, &phi, 0.25),
        Err(HomogenizationError::EpsMismatch { .. })
    ));
}

fn constant_two_scale(lat: XLattice<f64>, c: f64, taus: Vec<f64>) -> TwoScaleField<f64> {
    let g = Grid::unit_torus(16).unwrap();
    let frames = (0..lat.len())
        .map(|_| taus.iter().map(|_| ScalarField::constant(g, c)).collect())
        .collect();
    TwoScaleField::new(lat, taus, frames).unwrap()
}

#[test]
fn limit_pairing_and_cell_average() {
    let lat = XLattice::new(32, 32, 1.0, 1.0);
    let u0 = constant_two_scale(lat, 2.0, vec![0.0]);
    let flat = TestFunction::new(Target::U1, chi(), YProfile::Const);
    let chi_int: f64 = lat.points().iter().map(|&(x, z)| chi().value(x, z)).sum::<f64>() * lat.weight();
    assert!((limit_pairing(&u0, &flat) - 2.0 * chi_int).abs() < 1e-12);
    let wavy = TestFunction::new(Target::U1, chi(), YProfile::Cos(1, 2));
    assert!(limit_pairing(&u0, &wavy).abs() < 1e-12);
    for series in cell_average(&u0) {
        assert!(series.iter().all(|&v| (v - 2.0).abs() < 1e-14));
    }
    let bad = TwoScaleField::new(lat, vec![0.0], vec![]);
    assert!(matches!(bad, Err(HomogenizationError::SampleMismatch { .. })));
}

#[test]
fn pairing_error_is_first_order_in_eps() {
    let g = boxg(512, 16);
    let mut eps = vec![];
    let mut err = vec![];
    for e in [0.25, 0.125, 0.0625, 0.03125] {
        let u = ScalarField::from_fn(g, |x, _| (2.0 * PI * x / e).sin());
        // the two-scale limit sin(2πy₁) pairs to zero against x₁
        err.push(pairing_with(&single(e, u), e, |x, _, _, _, _| x).abs());
        eps.push(e);
    }
    let slope = least_squares_order(&eps, &err).unwrap();
    assert!((0.8..=1.2).contains(&slope), "{slope} {err:?}");
}

#[test]
fn zero_data_report_has_no_order() {
    let g = boxg(32, 16);
    let lat = XLattice::new(4, 4, 1.0, 1.0);
    let u0 = constant_two_scale(lat, 0.0, vec![0.0, 0.1]);
    let trajs: Vec<_> = [0.25, 0.125, 0.0625]
        .iter()
        .map(|&e| ScalarTrajectory::new(e, vec![0.0, 0.1], vec![ScalarField::zeros(g); 2]).unwrap())
        .collect();
    let phi = TestFunction::new(Target::Theta, chi(), YProfile::Sin(1, 1));
    let rep = two_scale_error_sweep(&trajs, &u0, &phi).unwrap();
    assert!(rep.errors.iter().all(|&e| e == 0.0));
    assert_eq!(rep.estimated_order, None);
    assert!(!rep.monotone);
    let rev: Vec<_> = trajs.iter().rev().cloned().collect();
    assert!(matches!(
        two_scale_error_sweep(&rev, &u0, &phi),
        Err(HomogenizationError::EpsOrder)
    ));
    let short = constant_two_scale(lat, 0.0, vec![0.0]);
    assert!(matches!(
        two_scale_error_sweep(&trajs, &short, &phi),
        Err(HomogenizationError::WindowMismatch)
    ));
}

#[test]
fn phi_file_round_trip_and_errors() {
    let text = "# test functions\nu1 chi:gaussian 0.5,0.5,0.2 * y:cos 1,0\n\ntheta chi:bump 0.5,0.4,0.3 * y:tri 1,1 * tau:poly 2\n";
    let phis = parse_phi_file::<f64>(text).unwrap();
    assert_eq!(phis.len(), 2);
    for p in &phis {
        let again = TestFunction::<f64>::parse(&p.to_string()).unwrap();
        assert_eq!(&again, p);
    }
    match parse_phi_file::<f64>("u1 chi:gaussian 0.5,0.5,0.2 * y:cos 1,0\nbogus\n") {
        Err(HomogenizationError::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn pairing_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 1i32..4) {
        let eps = 0.125;
        let g = boxg(64, 32);
        let u = ScalarField::from_fn(g, |x, z| (2.0 * PI * x / eps).cos() * z);
        let v = ScalarField::from_fn(g, |x, z| x * x + (2.0 * PI * z / eps).sin());
        let w = u.scaled(a).add(&v.scaled(b));
        let phi = TestFunction::new(Target::U1, chi(), YProfile::Cos(k, 1));
        let lhs = pairing(&single(eps, w), &phi, eps).unwrap();
        let rhs = a * pairing(&single(eps, u), &phi, eps).unwrap() + b * pairing(&single(eps, v), &phi, eps).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }
}

#[test]
fn family_glue_and_matched_resolution() {
    use benard_core::cell::{solve_cell_family, CellFamilyConfig, CellParams};
    use benard_core::homogenization::{lattice_samples, matched_resolution, standard_phi_suite, two_scale_from_family};
    let lat = XLattice::new(2, 2, 1.0, 1.0);
    let samples = lattice_samples(&lat);
    assert_eq!(samples[3].tag, (1, 1));
    assert_eq!(samples[1].x, (0.75, 0.25));
    let cfg = CellFamilyConfig {
        n: 16,
        params: CellParams::leading_order(1.0, 1.0, 0.0),
        dtau: 1e-3,
        tau_end: 0.004,
        checkpoint_every: 2,
        out_dir: None,
    };
    let init = |s: &benard_core::cell::CellSample<f64>, g: &Grid<f64>| {
        let c = s.x.0;
        (
            benard_core::fields::VectorField::zeros(*g),
            ScalarField::from_fn(*g, |y, _| c * (2.0 * PI * y).cos()),
        )
    };
    let fam = solve_cell_family(&samples, &vec![[0.0; 2]; 4], &cfg, &init).unwrap();
    let u0 = two_scale_from_family(&lat, &fam, Target::Theta).unwrap();
    assert_eq!(u0.taus.len(), 3);
    assert_eq!(u0.frames[1][0], fam[1].theta0[0]);
    let suite = standard_phi_suite(chi());
    assert!(suite.len() >= 5 && suite.iter().all(|p| !p.is_y_independent()));
    let g = boxg(64, 16);
    let trajs = vec![ScalarTrajectory::new(0.25, u0.taus.clone(), vec![ScalarField::zeros(g); 3]).unwrap()];
    let (t2, u2) = matched_resolution(&trajs, &u0, 32).unwrap();
    assert_eq!(t2[0].frames[0].grid().nx(), 128);
    assert_eq!(u2.frames[0][0].grid().nx(), 32);
    // refinement preserves the limit pairing of band-limited cell data
    let phi = TestFunction::new(Target::Theta, chi(), YProfile::Cos(1, 0));
    assert!((limit_pairing(&u0, &phi) - limit_pairing(&u2, &phi)).abs() < 1e-14);
    assert!(matches!(
        matched_resolution(&trajs, &u0, 24),
        Err(HomogenizationError::Resolution { .. })
    ));
}
