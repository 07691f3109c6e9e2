use std::fs;
use std::path::{Path, PathBuf};

use benard_core::cell::{CellSample, CellTrajectory};
use benard_core::fields::{ScalarField, VectorField};
use benard_core::homogenization::XLattice;
use benard_core::snapshot::Snapshot;
use benard_core::solver::{SweepMember, SweepMonitors};

use crate::CliError;

fn sorted_with_prefix(dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))? {
        let p = e?.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with(prefix) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

fn tau_of(s: &Snapshot<f64>, tagged: bool) -> Result<f64, CliError> {
    if !tagged {
        return Ok(s.t);
    }
    s.tag("tau")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CliError::Io(format!("snapshot `{}` has no tau tag", s.name)))
}

fn frames(dir: &Path, u_prefix: &str, th_prefix: &str, tagged: bool) -> Result<FrameSet, CliError> {
    let us = sorted_with_prefix(dir, u_prefix)?;
    let ths = sorted_with_prefix(dir, th_prefix)?;
    if us.is_empty() || us.len() != ths.len() {
        return Err(CliError::Io(format!(
            "{}: unmatched or missing snapshots",
            dir.display()
        )));
    }
    let mut set = FrameSet::default();
    for (pu, pt) in us.iter().zip(&ths) {
        let su = Snapshot::<f64>::load(pu)?;
        let st = Snapshot::<f64>::load(pt)?;
        set.taus.push(tau_of(&su, tagged)?);
        set.u.push(su.as_vector()?);
        set.theta.push(
            st.components
                .into_iter()
                .next()
                .ok_or_else(|| CliError::Io("empty snapshot".into()))?,
        );
        set.tags = su.tags;
    }
    Ok(set)
}

#[derive(Default)]
struct FrameSet {
    taus: Vec<f64>,
    u: Vec<VectorField<f64>>,
    theta: Vec<ScalarField<f64>>,
    tags: Vec<(String, String)>,
}

/// Sweep members from `<dir>/eps_*/`, ordered by decreasing ε. Monitors
/// are not stored with the snapshots and come back zero.
pub fn load_sweep(dir: &Path) -> Result<Vec<SweepMember<f64>>, CliError> {
    let mut members = Vec::new();
    for d in sorted_with_prefix(dir, "eps_")? {
        let set = frames(&d, "u_", "theta_", true)?;
        let eps = set
            .tags
            .iter()
            .find(|(k, _)| k == "eps")
            .and_then(|(_, v)| v.parse().ok())
            .ok_or_else(|| CliError::Io(format!("{}: snapshots carry no eps tag", d.display())))?;
        members.push(SweepMember {
            eps,
            taus: set.taus,
            u: set.u,
            theta: set.theta,
            monitors: SweepMonitors::default(),
            files: Vec::new(),
        });
    }
    if members.is_empty() {
        return Err(CliError::Io(format!("no sweep members below {}", dir.display())));
    }
    members.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    Ok(members)
}

pub type LoadedCell = CellTrajectory<f64>;

/// Cell trajectories from `<dir>/cell_i_j/`, in lattice order, with the
/// lattice they cover.
pub fn load_cells(dir: &Path, lx: f64, lz: f64) -> Result<(XLattice<f64>, Vec<LoadedCell>), CliError> {
    let mut cells = Vec::new();
    for d in sorted_with_prefix(dir, "cell_")? {
        if !d.is_dir() {
            continue;
        }
        let set = frames(&d, "u0_", "theta0_", false)?;
        let tag = set
            .tags
            .iter()
            .find(|(k, _)| k == "xsample")
            .and_then(|(_, v)| v.split_once(','))
            .and_then(|(i, j)| Some((i.parse::<usize>().ok()?, j.parse::<usize>().ok()?)))
            .ok_or_else(|| CliError::Io(format!("{}: snapshots carry no xsample tag", d.display())))?;
        cells.push(CellTrajectory {
            sample: CellSample { tag, x: (0.0, 0.0) },
            gradp0: [0.0; 2],
            taus: set.taus,
            u0: set.u,
            theta0: set.theta,
            means: Vec::new(),
            files: Vec::new(),
        });
    }
    let n1 = cells.iter().map(|c| c.sample.tag.0 + 1).max().unwrap_or(0);
    let n2 = cells.iter().map(|c| c.sample.tag.1 + 1).max().unwrap_or(0);
    if cells.is_empty() || cells.len() != n1 * n2 {
        return Err(CliError::Io(format!(
            "{}: cells do not cover a full lattice",
            dir.display()
        )));
    }
    let lat = XLattice::new(n1, n2, lx, lz);
    cells.sort_by_key(|c| (c.sample.tag.1, c.sample.tag.0));
    for (s, c) in cells.iter_mut().enumerate() {
        c.sample.x = lat.point(s);
    }
    Ok((lat, cells))
}

/// `i,j,g1,g2` rows, one per lattice point; a header line is allowed.
pub fn read_gradp0(path: &Path, lat: &XLattice<f64>) -> Result<Vec<[f64; 2]>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = vec![None; lat.len()];
    for (n, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if line.trim().is_empty() || (n == 0 && cols[0].parse::<usize>().is_err()) {
            continue;
        }
        let bad = || CliError::Usage(format!("{}: line {}: expected i,j,g1,g2", path.display(), n + 1));
        if cols.len() != 4 {
            return Err(bad());
        }
        let i: usize = cols[0].parse().map_err(|_| bad())?;
        let j: usize = cols[1].parse().map_err(|_| bad())?;
        let g = [cols[2].parse().map_err(|_| bad())?, cols[3].parse().map_err(|_| bad())?];
        if i >= lat.n1 || j >= lat.n2 {
            return Err(bad());
        }
        out[j * lat.n1 + i] = Some(g);
    }
    out.into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| CliError::Usage(format!("{}: not every lattice point has a value", path.display())))
}
