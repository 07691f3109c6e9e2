use std::f64::consts::PI;

use benard_core::cell::{
    cell_mean_ode_check, solve_cell_family, CellError, CellFamilyConfig, CellParams, CellSample, CellSolver, CellState,
    MeanSample,
};
use benard_core::fields::{curl_of_stream, Grid, Norms, ScalarField, VectorField};
use benard_core::snapshot::Snapshot;

fn torus() -> Grid<f64> {
    Grid::unit_torus(32).unwrap()
}

fn swirl(g: Grid<f64>, amp: f64) -> VectorField<f64> {
    let psi = ScalarField::from_fn(g, |x, z| {
        amp * ((2.0 * PI * x).sin() * (2.0 * PI * z).cos() + 0.5 * (4.0 * PI * z).sin())
    });
    curl_of_stream(&psi).unwrap()
}

#[test]
fn zero_cell_stays_zero() {
    let g = torus();
    let mut s = CellState::zero(g).unwrap();
    let mut solver = CellSolver::new(g, CellParams::leading_order(1.0, 1.0, 1.0)).unwrap();
    for _ in 0..20 {
        solver.cell_step(&mut s, 1e-3).unwrap();
    }
    assert_eq!(s.u0.max_magnitude(), 0.0);
    assert_eq!(s.theta0.max_abs(), 0.0);
    assert_eq!(s.p1.max_abs(), 0.0);
}

#[test]
fn constant_forcing_drives_the_mean_linearly() {
    let g = torus();
    let forcing = [0.3, -1.2];
    for advection in [false, true] {
        let mut params = CellParams::leading_order(0.5, 0.5, 1.0);
        params.advection = advection;
        let mut solver = CellSolver::new(g, params).unwrap();
        let mut s = CellState::new(VectorField::zeros(g), ScalarField::zeros(g), forcing, (0.5, 0.5)).unwrap();
        for _ in 0..200 {
            solver.cell_step(&mut s, 2.5e-3).unwrap();
        }
        let m = s.u0.mean();
        assert!((m[0] + forcing[0] * s.tau).abs() < 1e-10);
        assert!((m[1] + forcing[1] * s.tau).abs() < 1e-10);
    }
}

#[test]
fn theta_decays_inside_envelope() {
    let g = torus();
    let kappa = 0.2;
    let mut solver = CellSolver::new(g, CellParams::leading_order(0.3, kappa, 1.0)).unwrap();
    let th = ScalarField::from_fn(g, |x, z| {
        (2.0 * PI * x).cos() + 0.5 * (2.0 * PI * z).sin() + 0.2 * (4.0 * PI * x).sin()
    });
    let mut s = CellState::new(swirl(g, 0.01), th, [0.0; 2], (0.0, 0.0)).unwrap();
    let t0 = s.theta0.norms().l2;
    for _ in 0..400 {
        solver.cell_step(&mut s, 1e-3).unwrap();
        let bound = t0 * (-4.0 * PI * PI * kappa * s.tau).exp() * 1.05;
        assert!(s.theta0.norms().l2 <= bound);
        assert!(solver.divergence_defect(&s) < 1e-10);
        assert!(s.p1.mean().abs() < 1e-12);
    }
}

#[test]
fn single_mode_matches_closed_form() {
    let g = torus();
    let (nu, kappa, ga, a, b) = (0.1, 0.05, 2.0, 0.7, 0.4);
    let mut solver = CellSolver::new(g, CellParams::leading_order(nu, kappa, ga)).unwrap();
    let u = VectorField::from_fn(g, |x, _| [0.0, a * (2.0 * PI * x).sin()]);
    let th = ScalarField::from_fn(g, |x, _| b * (2.0 * PI * x).cos());
    let mut s = CellState::new(u, th, [0.0; 2], (0.0, 0.0)).unwrap();
    for _ in 0..500 {
        solver.cell_step(&mut s, 1e-3).unwrap();
    }
    let tau = s.tau;
    let lam = 4.0 * PI * PI;
    let et = (-lam * kappa * tau).exp();
    let eu = (-lam * nu * tau).exp();
    let c = ga * b * (et - eu) / (lam * (nu - kappa));
    for (i, k, x, _) in g.nodes() {
        let want_u2 = a * eu * (2.0 * PI * x).sin() + c * (2.0 * PI * x).cos();
        let want_th = b * et * (2.0 * PI * x).cos();
        assert!((s.u0.u2().at(i, k) - want_u2).abs() < 1e-5);
        assert!(s.u0.u1().at(i, k).abs() < 1e-12);
        assert!((s.theta0.at(i, k) - want_th).abs() < 1e-5);
    }
}

fn mean_run(m_u: f64, m_t: f64, dtau: f64, tau_end: f64) -> Vec<MeanSample<f64>> {
    let g = Grid::unit_torus(16).unwrap();
    let mut solver = CellSolver::new(g, CellParams::normalized()).unwrap();
    let fl = swirl(g, 0.05);
    let u = VectorField::from_fn(g, |_, _| [0.0, m_u]).add(&fl);
    let th = ScalarField::from_fn(g, |x, z| m_t + 0.1 * (2.0 * PI * (x + z)).sin());
    let mut s = CellState::new(u, th, [0.0; 2], (0.0, 0.0)).unwrap();
    let mut out = vec![];
    let steps = (tau_end / dtau).round() as usize;
    for n in 0..=steps {
        if n > 0 {
            solver.cell_step(&mut s, dtau).unwrap();
        }
        let (mu, mt) = s.means();
        out.push(MeanSample {
            tau: s.tau,
            mean_u: mu,
            mean_theta: mt,
        });
    }
    out
}

#[test]
fn zero_means_are_preserved() {
    let tr = mean_run(0.0, 0.0, 1e-3, 1.0);
    let rep = cell_mean_ode_check(&tr, &CellParams::normalized(), [0.0; 2]).unwrap();
    assert!(rep.max_abs_mean < 1e-9);
    assert!(rep.max_residual < 1e-9);
}

#[test]
fn mean_ode_closed_forms() {
    let tr = mean_run(1.0, 0.0, 5e-4, 0.5);
    let last = tr.last().unwrap();
    assert!((last.tau - 0.5).abs() < 1e-12);
    assert!((last.mean_u[1] - 0.5f64.cosh()).abs() < 1e-6);
    assert!((last.mean_theta - 0.5f64.sinh()).abs() < 1e-6);
    let tr = mean_run(1.0, 1.0, 5e-4, 0.5);
    let last = tr.last().unwrap();
    assert!((last.mean_u[1] - 0.5f64.exp()).abs() < 1e-6);
    assert!((last.mean_theta - 0.5f64.exp()).abs() < 1e-6);
    let rep = cell_mean_ode_check(&tr, &CellParams::normalized(), [0.0; 2]).unwrap();
    assert!(rep.max_residual < 1e-5);
}

#[test]
fn mean_ode_residual_is_second_order() {
    let p = CellParams::normalized();
    let r1 = cell_mean_ode_check(&mean_run(1.0, 0.0, 2e-3, 0.5), &p, [0.0; 2])
        .unwrap()
        .max_residual;
    let r2 = cell_mean_ode_check(&mean_run(1.0, 0.0, 1e-3, 0.5), &p, [0.0; 2])
        .unwrap()
        .max_residual;
    let ratio = r1 / r2;
    assert!((3.0..5.0).contains(&ratio), "{ratio}");
}

#[test]
fn short_trajectories_are_rejected() {
    let tr = mean_run(0.0, 0.0, 1e-3, 1e-3);
    assert!(matches!(
        cell_mean_ode_check(&tr, &CellParams::normalized(), [0.0; 2]),
        Err(CellError::TooShort(2))
    ));
}

#[test]
fn cell_energy_inequality() {
    let g = torus();
    let nu = 0.4;
    let mut solver = CellSolver::new(g, CellParams::leading_order(nu, 1.0, 0.0)).unwrap();
    let mut s = CellState::new(swirl(g, 0.2), ScalarField::zeros(g), [0.0; 2], (0.0, 0.0)).unwrap();
    for _ in 0..100 {
        let before = s.u0.norms().l2.powi(2);
        solver.cell_step(&mut s, 1e-3).unwrap();
        let n = s.u0.norms();
        assert!((n.l2.powi(2) - before) / 1e-3 <= -2.0 * nu * n.grad_l2.powi(2) * 0.95 + 1e-8);
    }
}

fn family_cfg(dir: Option<std::path::PathBuf>) -> CellFamilyConfig<f64> {
    CellFamilyConfig {
        n: 16,
        params: CellParams::leading_order(0.5, 0.5, 1.0),
        dtau: 1e-3,
        tau_end: 0.02,
        checkpoint_every: 10,
        out_dir: dir,
    }
}

#[test]
fn family_is_deterministic_and_tagged() {
    let dir = tempfile::tempdir().unwrap();
    let samples = [
        CellSample {
            tag: (0, 0),
            x: (0.25, 0.25),
        },
        CellSample {
            tag: (1, 0),
            x: (0.25, 0.25),
        },
    ];
    let init =
        |_: &CellSample<f64>, g: &Grid<f64>| (swirl(*g, 0.3), ScalarField::from_fn(*g, |x, _| (2.0 * PI * x).sin()));
    let fam = solve_cell_family(&samples, &[[0.1, 0.2]; 2], &family_cfg(Some(dir.path().into())), &init).unwrap();
    assert_eq!(fam[0].u0, fam[1].u0);
    assert_eq!(fam[0].theta0, fam[1].theta0);
    assert_eq!(fam[0].taus.len(), 3);
    let snap = Snapshot::<f64>::load(&fam[1].files[0]).unwrap();
    assert_eq!(snap.xsample(), Some((1, 0)));
    assert_eq!(snap.grid.kind().as_str(), "torus");
    assert!(matches!(
        solve_cell_family(&samples, &[[0.0; 2]], &family_cfg(None), &init),
        Err(CellError::SampleMismatch { .. })
    ));
}

#[test]
fn zero_family_is_zero() {
    let samples = [CellSample {
        tag: (0, 0),
        x: (0.5, 0.5),
    }];
    let init = |_: &CellSample<f64>, g: &Grid<f64>| (VectorField::zeros(*g), ScalarField::zeros(*g));
    let fam = solve_cell_family(&samples, &[[0.0; 2]], &family_cfg(None), &init).unwrap();
    assert!(fam[0].u0.iter().all(|u| u.max_magnitude() == 0.0));
}
