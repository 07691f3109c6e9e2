use std::f64::consts::{E, PI};

use benard_core::bounds::{
    absorbing_constants, aspect_gate, barrier_check, decay_envelope, decay_rate_fit, enstrophy_window_check,
    leray_decay_envelope, maximum_principle_monitor, overshoot_decay, overshoot_norm, settled_radius, settling_time,
    BarrierSpec, BoundsError,
};
use benard_core::fields::{Grid, Norms, ScalarField, VectorField};
use benard_core::solver::{t_from_theta, BoxSolver, PhysicalParams, SolverState};
use proptest::prelude::*;

fn params(dt: f64, nu: f64, l: f64) -> PhysicalParams<f64> {
    PhysicalParams::new(nu, 1.0, 1.0, dt, 0.0, 1.0, l)
}

#[test]
fn barrier_closed_forms() {
    let s = BarrierSpec::<f64>::new(1.0, 0.1, 4).unwrap();
    // (1/4)^{1/3} and (3/4)(1/4)^{1/3}
    assert!((s.v_max() - 0.629_960_524_947_436_6).abs() < 1e-15);
    assert!((s.f_max() - 0.472_470_393_710_577_4).abs() < 1e-15);
    assert!(s.is_admissible());
    assert!(BarrierSpec::new(0.0, 0.1, 4).is_err());
    assert!(BarrierSpec::new(1.0, 0.1, 1).is_err());
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn barrier_conclusion_holds_below_the_root() {
    let s = BarrierSpec::new(1.0, 0.1, 4).unwrap();
    let root = bisect(|v| v - v.powi(4) - 0.1, 0.0, s.v_max());
    assert!(root < 4.0 * 0.1 / 3.0);
    let series: Vec<_> = (0..200)
        .map(|n| {
            let t = n as f64 * 0.05;
            (t, root * (1.0 - (-t).exp()))
        })
        .collect();
    assert!(series.iter().all(|&(_, v)| v - v.powi(4) <= 0.1 + 1e-15));
    let r = barrier_check(&s, &series, 0.01).unwrap();
    assert!(r.passed());
    assert!(r.margin > 0.0);
    let bad: Vec<_> = series.iter().map(|&(t, v)| (t, 2.0 * v)).collect();
    let r = barrier_check(&s, &bad, 0.01).unwrap();
    assert!(!r.satisfied && r.first_violation.is_some() && r.margin < 0.0);
}

#[test]
fn inadmissible_barrier_is_never_a_pass() {
    let s = BarrierSpec::new(1.0, 1.0, 7).unwrap();
    assert!(!s.is_admissible());
    let r = barrier_check(&s, &[(0.0, 0.0), (1.0, 0.0)], 0.01).unwrap();
    assert!(!r.applicable && !r.passed());
    let s = BarrierSpec::new(1.0, 0.1, 4).unwrap();
    let r = barrier_check(&s, &[(0.0, 0.9)], 0.01).unwrap();
    assert!(!r.applicable);
    assert!(matches!(barrier_check(&s, &[], 0.01), Err(BoundsError::Empty)));
}

#[test]
fn absorbing_constants_closed_form() {
    let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 3f64.sqrt());
    let c = absorbing_constants(&p, 0.0).unwrap();
    assert!((c.k - 1.0).abs() < 1e-15);
    let p = PhysicalParams::new(0.7, 0.3, 2.5, 1.5, 0.25, 0.8, 3.0);
    let c = absorbing_constants(&p, 0.01).unwrap();
    let (ga, dt, l, h, nu, ka): (f64, f64, f64, f64, f64, f64) = (2.5, 1.25, 3.0, 0.8, 0.7, 0.3);
    let lam = PI * PI / (h * h);
    let k = ga * dt * l / 3f64.sqrt();
    assert!((c.k - k).abs() < 1e-12);
    assert!((c.absorbing_radius - ((1.0 / ga + 1.0 / (lam * nu)) * k * h.sqrt() + 0.01)).abs() < 1e-12);
    let k1 = 3.0 * k * k / (lam * lam * nu * nu) * (h / nu + dt * dt / (lam * lam * ka.powi(3) * h));
    assert!((c.k1 / k1 - 1.0).abs() < 1e-12);
    assert!((c.beta - lam * nu / 2.0).abs() < 1e-12);
    let a = ga * ga * dt * dt * l * l * h / (6.0 * lam * lam * nu * nu * c.beta);
    assert!((c.a_barrier / a - 1.0).abs() < 1e-12);
    let m = 2.0 * ga * dt * dt * l / (3f64.sqrt() * lam * nu * h.sqrt());
    assert!((c.m_barrier / m - 1.0).abs() < 1e-12);
    assert!(absorbing_constants(&PhysicalParams::new(1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0), 0.0).is_err());
}

#[test]
fn constants_scale_with_the_temperature_gap() {
    let c1 = absorbing_constants(&params(1.0, 1.0, 2.0), 0.0).unwrap();
    let c2 = absorbing_constants(&params(2.0, 1.0, 2.0), 0.0).unwrap();
    assert!((c2.k / c1.k - 2.0).abs() < 1e-12);
    assert!((c2.a_barrier / c1.a_barrier - 4.0).abs() < 1e-12);
    // the forcing level of the order-7 barrier carries (T₁−T₂)²
    assert!((c2.m_barrier / c1.m_barrier - 4.0).abs() < 1e-12);
}

#[test]
fn aspect_gate_ratio() {
    let p = PhysicalParams::<f64>::new(1.0, 1.0, 1e-3, 1.0, 0.0, 1.0, 2.0);
    let g = aspect_gate(&p, 1e-3, 10.0).unwrap();
    assert!((g.lhs - 2.0).abs() < 1e-15);
    assert!((g.rhs - 1e-6 * 8.0).abs() < 1e-18);
    assert!(g.large);
    let g = aspect_gate(&params(1.0, 1.0, 2.0), 1.0, 10.0).unwrap();
    assert!(!g.large);
}

#[test]
fn settling_time_boundary_cases() {
    let p = params(1.0, 0.5, 2.0);
    let lam_nu = p.lambda1 * p.nu;
    let unit = 1.0 * 1.0 * 2.0 * 1.0 / (3f64.sqrt() * lam_nu);
    assert_eq!(settling_time(&p, unit).unwrap(), 0.0);
    assert_eq!(settling_time(&p, 0.5 * unit).unwrap(), 0.0);
    assert!((settling_time(&p, E * unit).unwrap() - 1.0 / lam_nu).abs() < 1e-12);
    assert!((settled_radius(&p).unwrap() - unit).abs() < 1e-14);
}

#[test]
fn settling_time_trajectory_cross_check() {
    let g = Grid::new_box(8, 48, 1.0, 1.0).unwrap();
    // a tiny buoyancy coefficient keeps the forcing negligible
    let p = PhysicalParams::new(1.0, 1.0, 1e-3, 1.0, 0.0, 1.0, 1.0);
    let radius = settled_radius(&p).unwrap();
    let shear = VectorField::from_fn(g, |_, z: f64| [(PI * z).sin(), 0.0]);
    let u0 = shear.scaled(E * E * radius / shear.norms().l2);
    let t_s = settling_time(&p, u0.norms().l2).unwrap();
    assert!((t_s - 2.0 / (p.lambda1 * p.nu)).abs() < 1e-10);
    let mut solver = BoxSolver::new(g, p).unwrap();
    let mut st = SolverState::new(u0, ScalarField::zeros(g), 1.0).unwrap();
    solver.initialize(&mut st).unwrap();
    let steps = 400;
    for _ in 0..steps {
        solver.step(&mut st, t_s / steps as f64).unwrap();
    }
    assert!(st.u.norms().l2 <= radius * 1.1, "{} vs {}", st.u.norms().l2, radius);
}

#[test]
fn eigenmode_decays_at_the_poincare_rate() {
    let g = Grid::new_box(8, 64, 2.0, 1.0).unwrap();
    let p = PhysicalParams::new(0.5, 1.0, 0.0, 1.0, 0.0, 1.0, 2.0);
    let mut solver = BoxSolver::new(g, p).unwrap();
    let u0 = VectorField::from_fn(g, |_, z: f64| [(PI * z).sin(), 0.0]);
    let mut st = SolverState::new(u0, ScalarField::zeros(g), 1.0).unwrap();
    solver.initialize(&mut st).unwrap();
    for _ in 0..200 {
        solver.step(&mut st, 2e-3).unwrap();
    }
    let series: Vec<_> = st.history.iter().map(|d| (d.t, d.u.l2)).collect();
    let rate = decay_rate_fit(&series).unwrap();
    let want = p.lambda1 * p.nu;
    assert!((rate / want - 1.0).abs() < 0.1, "{rate} vs {want}");
    let r = leray_decay_envelope(&series, series[0].1, 0.0, p.lambda1, p.nu, 0.05).unwrap();
    assert!(r.passed());
}

#[test]
fn decay_envelope_zero_data_and_forcing_limit() {
    let series: Vec<_> = (0..50).map(|n| (n as f64 * 0.1, 0.0)).collect();
    let r = leray_decay_envelope(&series, 0.0, 0.0, 1.0, 1.0, 0.05).unwrap();
    assert!(r.passed());
    assert_eq!(r.margin, 0.0);
    // energy ODE y' = −λν y + |f| integrated by RK4
    let (lam, nu, f) = (PI * PI, 0.3, 2.0);
    let rhs = |y: f64| -lam * nu * y + f;
    let (mut y, dt) = (5.0, 1e-3);
    let mut traj = vec![(0.0, y)];
    for n in 1..=20_000 {
        let k1 = rhs(y);
        let k2 = rhs(y + 0.5 * dt * k1);
        let k3 = rhs(y + 0.5 * dt * k2);
        let k4 = rhs(y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        traj.push((n as f64 * dt, y));
    }
    assert!(leray_decay_envelope(&traj, 5.0, f, lam, nu, 0.05).unwrap().passed());
    let tail = traj[traj.len() / 2..].iter().map(|p| p.1).fold(0.0, f64::max);
    assert!(tail <= f / (lam * nu) * 1.05);
    assert!(matches!(
        leray_decay_envelope(&[], 1.0, 0.0, 1.0, 1.0, 0.05),
        Err(BoundsError::Empty)
    ));
}

#[test]
fn enstrophy_windows() {
    let (lam, nu) = (PI * PI, 1.0);
    let series: Vec<_> = (0..=300)
        .map(|n| {
            let t = n as f64 * 0.01;
            let u = (-lam * nu * t).exp();
            (t, u, lam.sqrt() * u)
        })
        .collect();
    assert!(enstrophy_window_check(&series, 0.0, lam, nu, 0.05).unwrap().passed());
    let loud: Vec<_> = series.iter().map(|&(t, u, g)| (t, u, 100.0 * g + 1.0)).collect();
    assert!(!enstrophy_window_check(&loud, 0.0, lam, nu, 0.05).unwrap().satisfied);
    assert!(matches!(
        enstrophy_window_check(&series[..50], 0.0, lam, nu, 0.05),
        Err(BoundsError::TooShort { .. })
    ));
}

#[test]
fn maximum_principle_monitor_margins() {
    let series = [(0.0f64, 0.3, 0.3), (1.0, 0.3, 0.3)];
    let r = maximum_principle_monitor(&series, 1.0, 0.0, 1e-8).unwrap();
    assert!(r.passed());
    assert!((r.margin - 0.3).abs() < 1e-15);
    let r = maximum_principle_monitor(&[(0.0, 0.0, 1.0), (0.5, -0.2, 1.0)], 1.0, 0.0, 1e-8).unwrap();
    assert!(!r.satisfied);
    assert_eq!(r.first_violation, Some(0.5));
}

#[test]
fn overshoot_decays_under_diffusion() {
    let g = Grid::new_box(8, 32, 1.0, 1.0).unwrap();
    let p = PhysicalParams::new(1.0, 0.5, 0.0, 1.0, 0.0, 1.0, 1.0);
    let mut solver = BoxSolver::new(g, p).unwrap();
    // T = 1 − z + θ exceeds T₁ = 1 by about 0.1 near the lower wall
    let theta = ScalarField::from_fn(g, |_, z: f64| 1.1 * (PI * z).sin());
    let mut st = SolverState::new(VectorField::zeros(g), theta, 1.0).unwrap();
    solver.initialize(&mut st).unwrap();
    let mut series = vec![];
    for n in 0..=100 {
        if n > 0 {
            solver.step(&mut st, 2e-3).unwrap();
        }
        let temp = t_from_theta(&st.theta, &p).unwrap();
        series.push((st.t, overshoot_norm(&temp, p.t1)));
    }
    assert!(series[0].1 > 0.0);
    let rep = overshoot_decay(&series, p.lambda1, p.kappa, 0.5);
    assert!(rep.satisfied, "{rep:?}");
    let stays = [(0.0, 0.0), (1.0, 0.0)];
    assert!(overshoot_decay(&stays, 1.0, 1.0, 0.5).satisfied);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn barrier_maximum_identity(a in 0.01f64..100.0, seven in any::<bool>()) {
        let k = if seven { 7 } else { 4 };
        let s = BarrierSpec::new(a, 0.1, k).unwrap();
        let kf = k as f64;
        let want = (kf - 1.0) / kf * (1.0 / (kf * a)).powf(1.0 / (kf - 1.0));
        prop_assert!((s.f(s.v_max()) - want).abs() <= 1e-14 * want.max(1.0));
        prop_assert!(s.f(s.v_max() * 1.01) < s.f(s.v_max()));
        prop_assert!(s.f(s.v_max() * 0.99) < s.f(s.v_max()));
    }

    #[test]
    fn radius_is_monotone(dt in 0.1f64..10.0, nu in 0.1f64..10.0) {
        let r = |dt: f64, nu: f64| absorbing_constants(&params(dt, nu, 2.0), 0.0).unwrap().absorbing_radius;
        prop_assert!(r(dt * 1.01, nu) > r(dt, nu));
        prop_assert!(r(dt, nu * 1.01) < r(dt, nu));
    }

    #[test]
    fn super_envelope_series_never_pass(u0 in 0.1f64..5.0, f in 0.0f64..3.0, t_bad in 0usize..100, bump in 0.001f64..1.0) {
        let (lam, nu) = (PI * PI, 0.5);
        let mut s: Vec<_> = (0..100).map(|n| {
            let t = n as f64 * 0.01;
            (t, decay_envelope(t, u0, f, lam, nu))
        }).collect();
        s[t_bad].1 = s[t_bad].1 * 1.05 * (1.0 + bump) + bump;
        let r = leray_decay_envelope(&s, u0, f, lam, nu, 0.05).unwrap();
        prop_assert!(!r.satisfied);
        prop_assert!(r.margin < 0.0);
    }
}
