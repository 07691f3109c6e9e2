//! Flat `key=value` experiment configuration.
//!
//! Lines are `key=value`, `#` starts a comment, blank lines are ignored and a
//! later assignment overrides an earlier one. Every key has a default, so an
//! empty file is a valid configuration. Parsing collects every problem in the
//! file before reporting.

use std::fmt;
use std::path::{Path, PathBuf};

use benard_core::homogenization::{Envelope, EnvelopeKind};
use benard_core::solver::PhysicalParams;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line number, absent for whole-file checks.
    pub line: Option<usize>,
    pub key: String,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.msg),
            None => write!(f, "{}: {}", self.key, self.msg),
        }
    }
}

/// All problems found in one configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

impl ConfigErrors {
    pub fn mentions(&self, key: &str) -> bool {
        self.0.iter().any(|e| e.key == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtChoice {
    Fixed,
    Auto,
}

/// Initial state of a plain box run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Rest,
    /// `θ₀ = init_amp·sin(πz/h)·cos(2π·init_mode·x/L)`, `u₀ = 0`.
    Mode,
    /// Seeded band-limited θ₀ with peak `init_amp`, `u₀ = 0`.
    Random,
}

/// Where the cell runs take their frozen `∇ₓp₀` from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GradP0 {
    Zero,
    /// CSV rows `i,j,g1,g2`, one per lattice point.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nx: usize,
    pub nz: usize,
    pub lx: f64,
    pub h: f64,
    pub nu: f64,
    pub kappa: f64,
    pub g_alpha: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha: f64,

    pub t_end: f64,
    pub dt: f64,
    pub dt_policy: DtChoice,
    pub cfl: f64,
    pub snapshot_every: usize,
    pub div_tol: f64,
    pub init: InitKind,
    pub init_amp: f64,
    pub init_mode: usize,

    pub eps: Vec<f64>,
    pub gamma: f64,
    pub theta_source: bool,
    pub amp_u: f64,
    pub amp_theta: f64,
    pub chi: EnvelopeKind,
    pub chi_cx: f64,
    pub chi_cz: f64,
    pub chi_w: f64,
    pub dtau: f64,
    pub tau_end: f64,
    pub checkpoint_every: usize,

    pub cell_n: usize,
    pub lattice_n1: usize,
    pub lattice_n2: usize,
    pub gradp0: GradP0,

    pub phis: Option<PathBuf>,
    pub phi_chi: EnvelopeKind,
    pub phi_cx: f64,
    pub phi_cz: f64,
    pub phi_w: f64,
    pub points_per_period: usize,

    pub slack: f64,
    pub barrier_delta: f64,
    pub absorbing_delta: f64,
    pub aspect_threshold: f64,
    pub c1: f64,
    pub c2: f64,

    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            nx: 64,
            nz: 32,
            lx: 1.0,
            h: 1.0,
            nu: 0.1,
            kappa: 0.1,
            g_alpha: 1.0,
            t1: 1.0,
            t2: 0.0,
            alpha: 1.0,
            t_end: 0.5,
            dt: 1e-3,
            dt_policy: DtChoice::Fixed,
            cfl: 0.4,
            snapshot_every: 100,
            div_tol: 1e-8,
            init: InitKind::Rest,
            init_amp: 0.1,
            init_mode: 1,
            eps: vec![0.25, 0.125, 0.0625],
            gamma: 1.5,
            theta_source: true,
            amp_u: 1.0,
            amp_theta: 1.0,
            chi: EnvelopeKind::Bump,
            chi_cx: 0.5,
            chi_cz: 0.5,
            chi_w: 0.3,
            dtau: 5e-3,
            tau_end: 0.05,
            checkpoint_every: 5,
            cell_n: 16,
            lattice_n1: 8,
            lattice_n2: 8,
            gradp0: GradP0::Zero,
            phis: None,
            phi_chi: EnvelopeKind::Bump,
            phi_cx: 0.5,
            phi_cz: 0.5,
            phi_w: 0.35,
            points_per_period: 64,
            slack: 0.05,
            barrier_delta: 0.01,
            absorbing_delta: 0.0,
            aspect_threshold: 10.0,
            c1: 1.0,
            c2: 1.0,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

/// Keys in serialization order.
pub const KEYS: &[&str] = &[
    "nx",
    "nz",
    "lx",
    "h",
    "nu",
    "kappa",
    "g_alpha",
    "t1",
    "t2",
    "alpha",
    "t_end",
    "dt",
    "dt_policy",
    "cfl",
    "snapshot_every",
    "div_tol",
    "init",
    "init_amp",
    "init_mode",
    "eps",
    "gamma",
    "theta_source",
    "amp_u",
    "amp_theta",
    "chi",
    "chi_cx",
    "chi_cz",
    "chi_w",
    "dtau",
    "tau_end",
    "checkpoint_every",
    "cell_n",
    "lattice_n1",
    "lattice_n2",
    "gradp0",
    "phis",
    "phi_chi",
    "phi_cx",
    "phi_cz",
    "phi_w",
    "points_per_period",
    "slack",
    "barrier_delta",
    "absorbing_delta",
    "aspect_threshold",
    "c1",
    "c2",
    "seed",
    "out",
];

fn num(v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("expected a number, got `{v}`"))
}

fn count(v: &str) -> Result<usize, String> {
    v.parse::<usize>()
        .map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn flag(v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn envelope_kind(v: &str) -> Result<EnvelopeKind, String> {
    match v {
        "bump" => Ok(EnvelopeKind::Bump),
        "gaussian" => Ok(EnvelopeKind::Gaussian),
        _ => Err(format!("expected bump or gaussian, got `{v}`")),
    }
}

fn envelope_name(k: EnvelopeKind) -> &'static str {
    match k {
        EnvelopeKind::Bump => "bump",
        EnvelopeKind::Gaussian => "gaussian",
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "nx" => self.nx = count(v)?,
            "nz" => self.nz = count(v)?,
            "lx" => self.lx = num(v)?,
            "h" => self.h = num(v)?,
            "nu" => self.nu = num(v)?,
            "kappa" => self.kappa = num(v)?,
            "g_alpha" => self.g_alpha = num(v)?,
            "t1" => self.t1 = num(v)?,
            "t2" => self.t2 = num(v)?,
            "alpha" => self.alpha = num(v)?,
            "t_end" => self.t_end = num(v)?,
            "dt" => self.dt = num(v)?,
            "dt_policy" => {
                self.dt_policy = match v {
                    "fixed" => DtChoice::Fixed,
                    "auto" => DtChoice::Auto,
                    _ => return Err(format!("expected fixed or auto, got `{v}`")),
                }
            }
            "cfl" => self.cfl = num(v)?,
            "snapshot_every" => self.snapshot_every = count(v)?,
            "div_tol" => self.div_tol = num(v)?,
            "init" => {
                self.init = match v {
                    "rest" => InitKind::Rest,
                    "mode" => InitKind::Mode,
                    "random" => InitKind::Random,
                    _ => return Err(format!("expected rest, mode or random, got `{v}`")),
                }
            }
            "init_amp" => self.init_amp = num(v)?,
            "init_mode" => self.init_mode = count(v)?,
            "eps" => self.eps = v.split(',').map(|s| num(s.trim())).collect::<Result<_, _>>()?,
            "gamma" => self.gamma = num(v)?,
            "theta_source" => self.theta_source = flag(v)?,
            "amp_u" => self.amp_u = num(v)?,
            "amp_theta" => self.amp_theta = num(v)?,
            "chi" => self.chi = envelope_kind(v)?,
            "chi_cx" => self.chi_cx = num(v)?,
            "chi_cz" => self.chi_cz = num(v)?,
            "chi_w" => self.chi_w = num(v)?,
            "dtau" => self.dtau = num(v)?,
            "tau_end" => self.tau_end = num(v)?,
            "checkpoint_every" => self.checkpoint_every = count(v)?,
            "cell_n" => self.cell_n = count(v)?,
            "lattice_n1" => self.lattice_n1 = count(v)?,
            "lattice_n2" => self.lattice_n2 = count(v)?,
            "gradp0" => {
                self.gradp0 = if v == "zero" {
                    GradP0::Zero
                } else {
                    GradP0::File(PathBuf::from(v))
                }
            }
            "phis" => {
                self.phis = if v.is_empty() || v == "standard" {
                    None
                } else {
                    Some(PathBuf::from(v))
                }
            }
            "phi_chi" => self.phi_chi = envelope_kind(v)?,
            "phi_cx" => self.phi_cx = num(v)?,
            "phi_cz" => self.phi_cz = num(v)?,
            "phi_w" => self.phi_w = num(v)?,
            "points_per_period" => self.points_per_period = count(v)?,
            "slack" => self.slack = num(v)?,
            "barrier_delta" => self.barrier_delta = num(v)?,
            "absorbing_delta" => self.absorbing_delta = num(v)?,
            "aspect_threshold" => self.aspect_threshold = num(v)?,
            "c1" => self.c1 = num(v)?,
            "c2" => self.c2 = num(v)?,
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| format!("expected a non-negative integer, got `{v}`"))?
            }
            "out" => self.out = PathBuf::from(v),
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "nx" => self.nx.to_string(),
            "nz" => self.nz.to_string(),
            "lx" => self.lx.to_string(),
            "h" => self.h.to_string(),
            "nu" => self.nu.to_string(),
            "kappa" => self.kappa.to_string(),
            "g_alpha" => self.g_alpha.to_string(),
            "t1" => self.t1.to_string(),
            "t2" => self.t2.to_string(),
            "alpha" => self.alpha.to_string(),
            "t_end" => self.t_end.to_string(),
            "dt" => self.dt.to_string(),
            "dt_policy" => match self.dt_policy {
                DtChoice::Fixed => "fixed".into(),
                DtChoice::Auto => "auto".into(),
            },
            "cfl" => self.cfl.to_string(),
            "snapshot_every" => self.snapshot_every.to_string(),
            "div_tol" => self.div_tol.to_string(),
            "init" => match self.init {
                InitKind::Rest => "rest".into(),
                InitKind::Mode => "mode".into(),
                InitKind::Random => "random".into(),
            },
            "init_amp" => self.init_amp.to_string(),
            "init_mode" => self.init_mode.to_string(),
            "eps" => fmt_list(&self.eps),
            "gamma" => self.gamma.to_string(),
            "theta_source" => self.theta_source.to_string(),
            "amp_u" => self.amp_u.to_string(),
            "amp_theta" => self.amp_theta.to_string(),
            "chi" => envelope_name(self.chi).into(),
            "chi_cx" => self.chi_cx.to_string(),
            "chi_cz" => self.chi_cz.to_string(),
            "chi_w" => self.chi_w.to_string(),
            "dtau" => self.dtau.to_string(),
            "tau_end" => self.tau_end.to_string(),
            "checkpoint_every" => self.checkpoint_every.to_string(),
            "cell_n" => self.cell_n.to_string(),
            "lattice_n1" => self.lattice_n1.to_string(),
            "lattice_n2" => self.lattice_n2.to_string(),
            "gradp0" => match &self.gradp0 {
                GradP0::Zero => "zero".into(),
                GradP0::File(p) => p.display().to_string(),
            },
            "phis" => self
                .phis
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "standard".into()),
            "phi_chi" => envelope_name(self.phi_chi).into(),
            "phi_cx" => self.phi_cx.to_string(),
            "phi_cz" => self.phi_cz.to_string(),
            "phi_w" => self.phi_w.to_string(),
            "points_per_period" => self.points_per_period.to_string(),
            "slack" => self.slack.to_string(),
            "barrier_delta" => self.barrier_delta.to_string(),
            "absorbing_delta" => self.absorbing_delta.to_string(),
            "aspect_threshold" => self.aspect_threshold.to_string(),
            "c1" => self.c1.to_string(),
            "c2" => self.c2.to_string(),
            "seed" => self.seed.to_string(),
            "out" => self.out.display().to_string(),
            _ => unreachable!("key list and accessor disagree on `{key}`"),
        }
    }

    /// One `key=value` line per key; parses back to an equal config.
    pub fn serialize(&self) -> String {
        KEYS.iter().map(|k| format!("{k}={}\n", self.get(k))).collect()
    }

    /// Reads a config file, resolving relative `phis` and `gradp0` paths
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.to_path_buf(), e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        parse_config_in(&text, base).map_err(LoadError::Invalid)
    }

    pub fn params(&self) -> PhysicalParams<f64> {
        PhysicalParams::new(self.nu, self.kappa, self.g_alpha, self.t1, self.t2, self.h, self.lx)
    }

    pub fn chi_envelope(&self) -> Envelope<f64> {
        Envelope {
            kind: self.chi,
            cx: self.chi_cx,
            cz: self.chi_cz,
            w: self.chi_w,
        }
    }

    pub fn phi_envelope(&self) -> Envelope<f64> {
        Envelope {
            kind: self.phi_chi,
            cx: self.phi_cx,
            cz: self.phi_cz,
            w: self.phi_w,
        }
    }

    /// Constraint checks over the whole config.
    pub fn validate(&self) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        let mut bad = |key: &str, msg: &str| {
            errs.push(ConfigError {
                line: None,
                key: key.into(),
                msg: msg.into(),
            })
        };
        for (k, n) in [("nx", self.nx), ("nz", self.nz), ("cell_n", self.cell_n)] {
            if n < 8 || n % 2 == 1 {
                bad(k, "must be even and at least 8");
            }
        }
        for (k, v) in [
            ("lx", self.lx),
            ("h", self.h),
            ("nu", self.nu),
            ("kappa", self.kappa),
            ("alpha", self.alpha),
            ("dt", self.dt),
            ("div_tol", self.div_tol),
            ("chi_w", self.chi_w),
            ("phi_w", self.phi_w),
            ("dtau", self.dtau),
            ("aspect_threshold", self.aspect_threshold),
            ("c1", self.c1),
            ("c2", self.c2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad(k, "must be positive");
            }
        }
        for (k, v) in [
            ("t_end", self.t_end),
            ("tau_end", self.tau_end),
            ("slack", self.slack),
            ("absorbing_delta", self.absorbing_delta),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                bad(k, "must be non-negative");
            }
        }
        for (k, v) in [
            ("g_alpha", self.g_alpha),
            ("t1", self.t1),
            ("t2", self.t2),
            ("init_amp", self.init_amp),
            ("gamma", self.gamma),
            ("amp_u", self.amp_u),
            ("amp_theta", self.amp_theta),
            ("chi_cx", self.chi_cx),
            ("chi_cz", self.chi_cz),
            ("phi_cx", self.phi_cx),
            ("phi_cz", self.phi_cz),
        ] {
            if !v.is_finite() {
                bad(k, "must be finite");
            }
        }
        if self.t1 < self.t2 {
            bad("t1", "must not be below t2");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            bad("cfl", "must lie in (0, 1]");
        }
        if !(self.barrier_delta > 0.0 && self.barrier_delta < 1.0) {
            bad("barrier_delta", "must lie in (0, 1)");
        }
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            bad("eps", "values must lie in (0, 1]");
        }
        if !self.eps.windows(2).all(|w| w[0] > w[1]) {
            bad("eps", "values must be strictly decreasing");
        }
        for (k, n) in [
            ("checkpoint_every", self.checkpoint_every),
            ("lattice_n1", self.lattice_n1),
            ("lattice_n2", self.lattice_n2),
            ("points_per_period", self.points_per_period),
            ("init_mode", self.init_mode),
        ] {
            if n == 0 {
                bad(k, "must be at least 1");
            }
        }
        if let Some(p) = &self.phis {
            if !p.is_file() {
                bad("phis", &format!("file {} does not exist", p.display()));
            }
        }
        if let GradP0::File(p) = &self.gradp0 {
            if !p.is_file() {
                bad("gradp0", &format!("file {} does not exist", p.display()));
            }
        }
        errs
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}")]
    Invalid(ConfigErrors),
}

/// Parses and validates a config, with relative paths taken as given.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    parse_config_in(text, Path::new(""))
}

/// Like [`parse_config`], resolving relative file paths against `base`.
pub fn parse_config_in(text: &str, base: &Path) -> Result<ExperimentConfig, ConfigErrors> {
    let mut cfg = ExperimentConfig::default();
    let mut errs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errs.push(ConfigError {
                line: Some(n + 1),
                key: line.into(),
                msg: "expected key=value".into(),
            });
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if let Err(msg) = cfg.set(k, v) {
            errs.push(ConfigError {
                line: Some(n + 1),
                key: k.into(),
                msg,
            });
        }
    }
    let rebase = |p: &mut PathBuf| {
        if p.is_relative() && !base.as_os_str().is_empty() {
            *p = base.join(&*p);
        }
    };
    if let Some(p) = cfg.phis.as_mut() {
        rebase(p);
    }
    if let GradP0::File(p) = &mut cfg.gradp0 {
        rebase(p);
    }
    if errs.is_empty() {
        errs.extend(cfg.validate());
    } else {
        let failed: Vec<String> = errs.iter().map(|e| e.key.clone()).collect();
        errs.extend(cfg.validate().into_iter().filter(|e| !failed.contains(&e.key)));
    }
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), ExperimentConfig::default());
        assert_eq!(parse_config("# nothing\n\n   \n").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn every_key_serializes() {
        let text = ExperimentConfig::default().serialize();
        assert_eq!(text.lines().count(), KEYS.len());
        assert_eq!(parse_config(&text).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn errors_are_collected() {
        let e = parse_config("nx=abc\nbogus=1\nnu=-1\nnz 5\n").unwrap_err();
        assert_eq!(e.0.len(), 4, "{e}");
        assert_eq!(e.0[0].line, Some(1));
        assert!(e.mentions("bogus") && e.mentions("nu") && e.mentions("nx"));
    }
}
