use std::fs;
use std::path::{Path, PathBuf};

use benard_core::bounds::{
    absorbing_constants, aspect_gate, barrier_check, decay_rate_fit, enstrophy_window_check, leray_decay_envelope,
    maximum_principle_monitor, overshoot_decay, overshoot_norm, settled_radius, settling_time, undershoot_norm,
    BarrierSpec, BoundsError, EstimateReport,
};
use benard_core::fields::{gradient, ScalarField, VectorField};
use benard_core::homogenization::{
    average_pairing, cell_average, least_squares_order, matched_resolution, parse_phi_file, standard_phi_suite,
    two_scale_error_sweep, two_scale_from_family, weak_pairing, ScalarTrajectory, Target, TestFunction, TwoScaleField,
    XLattice,
};
use benard_core::meanfield::{euler_residual, interpolate_lattice, mean_advection, mean_field_states};
use benard_core::snapshot::Snapshot;
use benard_core::solver::t_from_theta;

use super::load::{load_cells, load_sweep, LoadedCell};
use super::simulate::box_grid;
use super::{fmt_f, write_csv};
use crate::config::ExperimentConfig;
use crate::CliError;

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

struct TargetData {
    raw: Vec<ScalarTrajectory<f64>>,
    limit: TwoScaleField<f64>,
    matched: Option<(Vec<ScalarTrajectory<f64>>, TwoScaleField<f64>)>,
}

fn target_data(
    members: &[benard_core::solver::SweepMember<f64>],
    lat: &XLattice<f64>,
    cells: &[LoadedCell],
    target: Target,
    points_per_period: usize,
) -> Result<TargetData, CliError> {
    let raw: Vec<_> = members
        .iter()
        .map(|m| ScalarTrajectory::from_sweep(m, target))
        .collect();
    let limit = two_scale_from_family(lat, cells, target)?;
    let matched = match matched_resolution(&raw, &limit, points_per_period) {
        Ok(m) => Some(m),
        Err(e) => {
            log::warn!("pairing at native resolution: {e}");
            None
        }
    };
    Ok(TargetData { raw, limit, matched })
}

/// Two-scale error report of every test function, written to
/// `<out>/homogenize/report.csv`.
pub fn homogenize(
    cfg: &ExperimentConfig,
    sweep_dir: &Path,
    cell_dir: &Path,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let members = load_sweep(sweep_dir)?;
    let (lat, cells) = load_cells(cell_dir, cfg.lx, cfg.h)?;
    let phis: Vec<TestFunction<f64>> = match &cfg.phis {
        Some(p) => parse_phi_file(&fs::read_to_string(p)?)?,
        None => standard_phi_suite(cfg.phi_envelope()),
    };
    let mut cache: Vec<(Target, TargetData)> = Vec::new();
    let mut rows = Vec::new();
    for phi in &phis {
        if !cache.iter().any(|(t, _)| *t == phi.target) {
            cache.push((
                phi.target,
                target_data(&members, &lat, &cells, phi.target, cfg.points_per_period)?,
            ));
        }
        let data = &cache.iter().find(|(t, _)| *t == phi.target).expect("cached").1;
        let (kind, eps, pairings, limit) = if phi.is_y_independent() {
            let avg = cell_average(&data.limit);
            let limit = average_pairing(&avg, &lat, &data.limit.taus, phi);
            let eps: Vec<f64> = data.raw.iter().map(|t| t.eps).collect();
            let p: Vec<f64> = data.raw.iter().map(|t| weak_pairing(t, phi)).collect();
            ("weak", eps, p, limit)
        } else {
            let rep = match &data.matched {
                Some((tr, u0)) => two_scale_error_sweep(tr, u0, phi)?,
                None => two_scale_error_sweep(&data.raw, &data.limit, phi)?,
            };
            ("two-scale", rep.eps_values, rep.pairings, rep.limit_pairing)
        };
        let errors: Vec<f64> = pairings.iter().map(|p| (p - limit).abs()).collect();
        let order = least_squares_order(&eps, &errors).map(fmt_f).unwrap_or_default();
        let monotone = errors.windows(2).all(|w| w[1] < w[0]);
        for ((e, p), err) in eps.iter().zip(&pairings).zip(&errors) {
            rows.push(vec![
                quoted(&phi.to_string()),
                kind.into(),
                fmt_f(*e),
                fmt_f(*p),
                fmt_f(limit),
                fmt_f(*err),
                order.clone(),
                monotone.to_string(),
            ]);
        }
    }
    let path = out.join("homogenize").join("report.csv");
    Ok(vec![write_csv(
        &path,
        "phi,kind,eps,pairing,limit,error,order,monotone",
        &rows,
    )?])
}

/// Bilinear sample of a box field at `(x, z)`, periodic in x.
fn sample(f: &ScalarField<f64>, x: f64, z: f64) -> f64 {
    let g = f.grid();
    let (nx, nz) = (g.nx(), g.nz());
    let sx = x / g.dx();
    let i0 = sx.floor();
    let ax = sx - i0;
    let i0 = (i0 as isize).rem_euclid(nx as isize) as usize;
    let i1 = (i0 + 1) % nx;
    let sz = (z / g.dz()).clamp(0.0, (nz - 1) as f64);
    let k0 = (sz.floor() as usize).min(nz - 2);
    let az = sz - k0 as f64;
    let v = |i, k| f.at(i, k);
    (1.0 - az) * ((1.0 - ax) * v(i0, k0) + ax * v(i1, k0)) + az * ((1.0 - ax) * v(i0, k0 + 1) + ax * v(i1, k0 + 1))
}

/// Mean-field fields from the cell family's averaged temperature, the
/// forced-Euler residual, the mean advection of every cell, and `∇p₀` on
/// the lattice in the format the cell stage reads.
pub fn meanfield(cfg: &ExperimentConfig, cell_dir: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let dir = out.join("meanfield");
    fs::create_dir_all(&dir)?;
    let (lat, cells) = load_cells(cell_dir, cfg.lx, cfg.h)?;
    let grid = box_grid(cfg)?;
    let taus = cells[0].taus.clone();
    let mut hist = Vec::with_capacity(taus.len());
    for k in 0..taus.len() {
        let vals: Vec<f64> = cells.iter().map(|c| c.theta0[k].mean()).collect();
        hist.push(interpolate_lattice(&vals, &lat, grid)?);
    }
    let step = if taus.len() > 1 { taus[1] - taus[0] } else { cfg.dtau };
    let states = mean_field_states(&hist, step)?;
    let mut files = Vec::new();
    for (k, s) in states.iter().enumerate() {
        let tau = taus[k];
        let snaps = [
            ("theta0bar", Snapshot::scalar("theta0bar", tau, &s.theta0_bar)),
            ("p0", Snapshot::scalar("p0", tau, &s.p0)),
            ("u0bar", Snapshot::vector("u0bar", tau, &s.u0_bar)),
            ("h", Snapshot::vector("h", tau, &s.h)),
        ];
        for (name, snap) in snaps {
            let p = dir.join(format!("{name}_{k:04}.bhf"));
            snap.with_tag("tau", tau).save(&p)?;
            files.push(p);
        }
    }
    if states.len() >= 3 {
        let u: Vec<VectorField<f64>> = states.iter().map(|s| s.u0_bar.clone()).collect();
        // cell pressures are mean-zero, so their cell average vanishes
        let p1 = vec![ScalarField::zeros(grid); u.len()];
        let r = euler_residual(&u, &p1, &hist, step)?;
        let rows: Vec<Vec<String>> = r
            .index
            .iter()
            .zip(r.residual.iter().zip(&r.advection))
            .map(|(&k, (res, adv))| vec![k.to_string(), fmt_f(taus[k]), fmt_f(*res), fmt_f(*adv)])
            .collect();
        files.push(write_csv(
            &dir.join("euler_residual.csv"),
            "k,tau,residual,advection",
            &rows,
        )?);
    }
    let mut adv_rows = Vec::new();
    for (k, &tau) in taus.iter().enumerate() {
        let (mut worst, mut defect) = (0.0f64, 0.0f64);
        for c in &cells {
            let m = mean_advection(&c.u0[k])?;
            worst = worst.max(m.value[0].abs().max(m.value[1].abs()));
            defect = defect.max(m.divergence_defect);
        }
        adv_rows.push(vec![k.to_string(), fmt_f(tau), fmt_f(worst), fmt_f(defect)]);
    }
    files.push(write_csv(
        &dir.join("mean_advection.csv"),
        "k,tau,max_abs_mean_advection,max_div_defect",
        &adv_rows,
    )?);
    let g = gradient(&states[0].p0)?;
    let gp: Vec<Vec<String>> = (0..lat.len())
        .map(|s| {
            let (i, j) = lat.index(s);
            let (x, z) = lat.point(s);
            vec![
                i.to_string(),
                j.to_string(),
                fmt_f(sample(g.u1(), x, z)),
                fmt_f(sample(g.u2(), x, z)),
            ]
        })
        .collect();
    files.push(write_csv(&dir.join("gradp0.csv"), "i,j,g1,g2", &gp)?);
    Ok(files)
}

struct Diag {
    cols: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Diag {
    fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut lines = text.lines();
        let cols = lines.next().unwrap_or("").split(',').map(String::from).collect();
        let mut rows = Vec::new();
        for l in lines {
            let r: Result<Vec<f64>, _> = l.split(',').map(str::parse).collect();
            rows.push(r.map_err(|_| CliError::Io(format!("{}: malformed row", path.display())))?);
        }
        Ok(Diag { cols, rows })
    }

    fn col(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let c = self
            .cols
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CliError::Io(format!("diagnostics lack column {name}")))?;
        Ok(self.rows.iter().map(|r| r[c]).collect())
    }
}

fn constant(name: &str, v: f64) -> Vec<String> {
    vec![
        name.into(),
        fmt_f(v),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]
}

fn check(r: &EstimateReport<f64>) -> Vec<String> {
    vec![
        r.name.replace(' ', "_"),
        String::new(),
        r.applicable.to_string(),
        r.satisfied.to_string(),
        fmt_f(r.margin),
        fmt_f(r.t_worst),
    ]
}

fn not_applicable(name: &str) -> Vec<String> {
    vec![
        name.into(),
        String::new(),
        "false".into(),
        "false".into(),
        String::new(),
        String::new(),
    ]
}

/// Closed-form constants and, when a run directory is given, every monitor
/// on its trajectory, written to `<out>/bounds/report.csv`.
pub fn bounds(cfg: &ExperimentConfig, run_dir: Option<&Path>, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let p = cfg.params();
    p.validate()?;
    let mut rows = vec![
        constant("rayleigh", p.rayleigh()),
        constant("prandtl", p.prandtl()),
        constant("aspect_ratio", p.aspect()),
        constant("lambda1", p.lambda1),
    ];
    let forced = cfg.g_alpha > 0.0 && cfg.t1 > cfg.t2;
    let mut absorbing = None;
    if forced {
        let c = absorbing_constants(&p, cfg.absorbing_delta)?;
        let gate = aspect_gate(&p, cfg.alpha, cfg.aspect_threshold)?;
        rows.extend([
            constant("absorbing_k", c.k),
            constant("absorbing_radius", c.absorbing_radius),
            constant("absorbing_k1", c.k1),
            constant("absorbing_beta", c.beta),
            constant("barrier_a", c.a_barrier),
            constant("barrier_m", c.m_barrier),
            constant("aspect_lhs", gate.lhs),
            constant("aspect_rhs", gate.rhs),
            constant("aspect_gate_ratio", gate.ratio),
            constant("aspect_large", if gate.large { 1.0 } else { 0.0 }),
            constant("settled_radius", settled_radius(&p)?),
        ]);
        absorbing = Some(c);
    }
    let generic = BarrierSpec::new(cfg.c1, cfg.c2, 4)?;
    rows.extend([
        constant("generic_barrier_v_max", generic.v_max()),
        constant("generic_barrier_f_max", generic.f_max()),
        constant(
            "generic_barrier_admissible",
            if generic.is_admissible() { 1.0 } else { 0.0 },
        ),
    ]);
    if let Some(dir) = run_dir {
        let d = Diag::read(&dir.join("diagnostics.csv"))?;
        let t = d.col("t")?;
        let ul2 = d.col("u_l2")?;
        let uh1 = d.col("u_h1")?;
        let thl2 = d.col("theta_l2")?;
        let (tmin, tmax) = (d.col("T_min")?, d.col("T_max")?);
        let u_series: Vec<(f64, f64)> = t.iter().copied().zip(ul2.iter().copied()).collect();
        let u0 = ul2.first().copied().unwrap_or(0.0);
        if forced {
            rows.push(constant("settling_time", settling_time(&p, u0)?));
        }
        if let Some(rate) = decay_rate_fit(&u_series) {
            rows.push(constant("u_decay_rate", rate));
        }
        let mp: Vec<(f64, f64, f64)> = (0..t.len()).map(|n| (t[n], tmin[n], tmax[n])).collect();
        rows.push(check(&maximum_principle_monitor(&mp, cfg.t1, cfg.t2, 1e-8)?));
        let f_norm = cfg.g_alpha.abs() * thl2.iter().fold(0.0f64, |a, &b| a.max(b));
        rows.push(check(&leray_decay_envelope(
            &u_series, u0, f_norm, p.lambda1, p.nu, cfg.slack,
        )?));
        let en: Vec<(f64, f64, f64)> = (0..t.len())
            .map(|n| (t[n], ul2[n], (uh1[n] * uh1[n] - ul2[n] * ul2[n]).max(0.0).sqrt()))
            .collect();
        match enstrophy_window_check(&en, f_norm, p.lambda1, p.nu, cfg.slack) {
            Ok(r) => rows.push(check(&r)),
            Err(BoundsError::TooShort { .. }) => rows.push(not_applicable("enstrophy_windows")),
            Err(e) => return Err(e.into()),
        }
        let v: Vec<(f64, f64)> = u_series.iter().map(|&(t, u)| (t, u * u)).collect();
        let mut r = barrier_check(&generic, &v, cfg.barrier_delta)?;
        r.name = "generic_barrier".into();
        rows.push(check(&r));
        match absorbing.map(|c| c.barrier()) {
            Some(Ok(spec)) => {
                let mut r = barrier_check(&spec, &v, cfg.barrier_delta)?;
                r.name = "absorbing_barrier".into();
                rows.push(check(&r));
            }
            _ => rows.push(not_applicable("absorbing_barrier")),
        }
        let mut over = Vec::new();
        let mut thetas: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("theta_"))
            })
            .collect();
        thetas.sort();
        for path in thetas {
            let s = Snapshot::<f64>::load(&path)?;
            let temp = t_from_theta(&s.components[0], &p)?;
            over.push((s.t, overshoot_norm(&temp, cfg.t1) + undershoot_norm(&temp, cfg.t2)));
        }
        let o = overshoot_decay(&over, p.lambda1, p.kappa, 0.5);
        rows.push(vec![
            "overshoot_decay".into(),
            o.rate.map(fmt_f).unwrap_or_default(),
            "true".into(),
            o.satisfied.to_string(),
            String::new(),
            String::new(),
        ]);
    }
    let path = out.join("bounds").join("report.csv");
    Ok(vec![write_csv(
        &path,
        "name,value,applicable,satisfied,margin,t_worst",
        &rows,
    )?])
}
