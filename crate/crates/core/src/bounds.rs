//! Closed-form constants and trajectory monitors for the a-priori estimates:
//! decay envelopes, absorbing radii, barrier functions, the maximum
//! principle and the settling time.
//!
//! Time series are slices of `(t, value)` pairs in increasing `t`.

use thiserror::Error;

use crate::fields::ScalarField;
use crate::solver::PhysicalParams;
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("invalid barrier spec: {0}")]
    InvalidSpec(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("series spans {span} time units, need at least {need}")]
    TooShort { span: f64, need: f64 },
    #[error("empty series")]
    Empty,
}

/// Default multiplicative slack on envelope checks.
pub const DEFAULT_SLACK: f64 = 0.05;
/// Default slack on barrier conclusions.
pub const BARRIER_DELTA: f64 = 0.01;

/// Outcome of one estimate check.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport<T> {
    pub name: String,
    pub satisfied: bool,
    /// False when the hypotheses of the estimate fail; such a report never
    /// counts as a pass.
    pub applicable: bool,
    /// Smallest `bound − value` over the series.
    pub margin: T,
    pub t_worst: T,
    pub first_violation: Option<T>,
}

impl<T: Real> EstimateReport<T> {
    fn not_applicable(name: &str) -> Self {
        EstimateReport {
            name: name.to_string(),
            satisfied: false,
            applicable: false,
            margin: T::zero(),
            t_worst: T::zero(),
            first_violation: None,
        }
    }

    /// Scans `bound(t) − value` and records the worst point.
    fn scan(name: &str, series: &[(T, T)], bound: impl Fn(T) -> T) -> Self {
        let mut margin = T::infinity();
        let mut t_worst = T::zero();
        let mut first = None;
        for &(t, v) in series {
            let m = bound(t) - v;
            if m < margin || m.is_nan() {
                margin = m;
                t_worst = t;
            }
            if first.is_none() && !(m >= T::zero()) {
                first = Some(t);
            }
        }
        EstimateReport {
            name: name.to_string(),
            satisfied: first.is_none(),
            applicable: true,
            margin,
            t_worst,
            first_violation: first,
        }
    }

    pub fn passed(&self) -> bool {
        self.applicable && self.satisfied
    }
}

fn check_series<T: Real>(series: &[(T, T)]) -> Result<(), BoundsError> {
    if series.is_empty() {
        Err(BoundsError::Empty)
    } else {
        Ok(())
    }
}

/// Barrier function `F(v) = v − a·v^k` with forcing level `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec<T> {
    pub a: T,
    pub m: T,
    pub k: u32,
}

impl<T: Real> BarrierSpec<T> {
    pub fn new(a: T, m: T, k: u32) -> Result<Self, BoundsError> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(BoundsError::InvalidSpec(format!("a = {a:?} must be positive")));
        }
        if !(m > T::zero()) || !m.is_finite() {
            return Err(BoundsError::InvalidSpec(format!("M = {m:?} must be positive")));
        }
        if k < 2 {
            return Err(BoundsError::InvalidSpec(format!("k = {k} must be at least 2")));
        }
        Ok(BarrierSpec { a, m, k })
    }

    pub fn f(&self, v: T) -> T {
        v - self.a * v.powi(self.k as i32)
    }

    /// Maximiser of `F` on `[0, ∞)`, `(1/(k·a))^{1/(k−1)}`.
    pub fn v_max(&self) -> T {
        let k = T::from_usize_lossy(self.k as usize);
        (T::one() / (k * self.a)).powf(T::one() / (k - T::one()))
    }

    /// `F(v_max) = ((k−1)/k)·v_max`.
    pub fn f_max(&self) -> T {
        let k = T::from_usize_lossy(self.k as usize);
        (k - T::one()) / k * self.v_max()
    }

    pub fn is_admissible(&self) -> bool {
        self.m < self.f_max()
    }

    /// `k·M/(k−1)`.
    pub fn bound(&self) -> T {
        let k = T::from_usize_lossy(self.k as usize);
        k / (k - T::one()) * self.m
    }
}

/// Checks `v(t) ≤ k·M/(k−1)·(1+δ)`. Inadmissible specs, or series that start
/// at or above `v_max`, give a not-applicable report.
pub fn barrier_check<T: Real>(
    spec: &BarrierSpec<T>,
    series: &[(T, T)],
    delta: T,
) -> Result<EstimateReport<T>, BoundsError> {
    check_series(series)?;
    let name = format!("barrier k={}", spec.k);
    if !spec.is_admissible() || !(series[0].1 < spec.v_max()) {
        return Ok(EstimateReport::not_applicable(&name));
    }
    let b = spec.bound() * (T::one() + delta);
    Ok(EstimateReport::scan(&name, series, |_| b))
}

/// `|u₀|e^{−λ₁νt} + (|f|/λ₁ν)(1 − e^{−λ₁νt})`.
pub fn decay_envelope<T: Real>(t: T, u0_norm: T, f_norm: T, lambda1: T, nu: T) -> T {
    let r = lambda1 * nu;
    let e = (-r * t).exp();
    u0_norm * e + f_norm / r * (T::one() - e)
}

/// Pointwise check of `‖u(t)‖_{L²}` against the decay envelope with
/// multiplicative slack.
pub fn leray_decay_envelope<T: Real>(
    u_norms: &[(T, T)],
    u0_norm: T,
    f_norm: T,
    lambda1: T,
    nu: T,
    slack: T,
) -> Result<EstimateReport<T>, BoundsError> {
    check_series(u_norms)?;
    if !(lambda1 > T::zero() && nu > T::zero()) {
        return Err(BoundsError::InvalidParams("λ₁ and ν must be positive".into()));
    }
    Ok(EstimateReport::scan("leray decay", u_norms, |t| {
        decay_envelope(t, u0_norm, f_norm, lambda1, nu) * (T::one() + slack)
    }))
}

/// Checks `ν∫_{t₁}^{t₁+1}‖∇u‖² dt ≤ 3|f|²/(λ₁²ν²) + |u(t₁)|²` on every unit
/// window starting in the later half of the admissible start times. The `|u(t₁)|²` term
/// vanishes once the trajectory has entered the absorbing ball.
///
/// `series` holds `(t, ‖u‖_{L²}, ‖∇u‖_{L²})`.
pub fn enstrophy_window_check<T: Real>(
    series: &[(T, T, T)],
    f_norm: T,
    lambda1: T,
    nu: T,
    slack: T,
) -> Result<EstimateReport<T>, BoundsError> {
    let (t0, t_end) = match (series.first(), series.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(BoundsError::Empty),
    };
    if t_end - t0 < T::one() {
        return Err(BoundsError::TooShort {
            span: (t_end - t0).as_f64(),
            need: 1.0,
        });
    }
    let late = t0 + (t_end - t0 - T::one()) / T::lit(2.0);
    let steady = T::lit(3.0) * f_norm * f_norm / (lambda1 * lambda1 * nu * nu);
    let mut rows = Vec::new();
    for (s, &(t1, u1, _)) in series.iter().enumerate() {
        if t1 < late || t1 + T::one() > t_end {
            continue;
        }
        let mut integral = T::zero();
        for w in series[s..].windows(2) {
            if w[1].0 > t1 + T::one() {
                break;
            }
            integral += (w[1].0 - w[0].0) * (w[0].2 * w[0].2 + w[1].2 * w[1].2) / T::lit(2.0);
        }
        rows.push((t1, nu * integral, (steady + u1 * u1) * (T::one() + slack)));
    }
    let pairs: Vec<(T, T)> = rows.iter().map(|r| (r.0, r.1 - r.2)).collect();
    if pairs.is_empty() {
        return Err(BoundsError::TooShort {
            span: (t_end - t0).as_f64(),
            need: 1.0,
        });
    }
    Ok(EstimateReport::scan("enstrophy window", &pairs, |_| T::zero()))
}

/// Least-squares decay rate `−d(ln v)/dt` over the strictly positive samples.
pub fn decay_rate_fit<T: Real>(series: &[(T, T)]) -> Option<T> {
    let pts: Vec<(T, T)> = series
        .iter()
        .filter(|p| p.1 > T::zero())
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(pts.len());
    let mt = pts.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let mv = pts.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let stt = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mt) * (p.0 - mt));
    let stv = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mt) * (p.1 - mv));
    if stt == T::zero() {
        None
    } else {
        Some(-stv / stt)
    }
}

/// Closed-form constants of the absorbing-set estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbingConstants<T> {
    /// `gα(T₁−T₂)L/√3`.
    pub k: T,
    /// `(1/gα + 1/λ₁ν)·K·h^{1/2} + δ`.
    pub absorbing_radius: T,
    /// `3K²/(λ₁²ν²)·(h/ν + (T₁−T₂)²/(λ₁²κ³h))`.
    pub k1: T,
    /// `λ₁ν/2`.
    pub beta: T,
    /// `g²α²(T₁−T₂)²L²h/(6λ₁²ν²β)`.
    pub a_barrier: T,
    /// `2gα(T₁−T₂)²L/(√3·λ₁ν·h^{1/2})`.
    pub m_barrier: T,
}

impl<T: Real> AbsorbingConstants<T> {
    /// Barrier with exponent 7 built from `a_barrier` and `m_barrier`.
    pub fn barrier(&self) -> Result<BarrierSpec<T>, BoundsError> {
        BarrierSpec::new(self.a_barrier, self.m_barrier, 7)
    }
}

fn checked<T: Real>(p: &PhysicalParams<T>) -> Result<(), BoundsError> {
    p.validate().map_err(|e| BoundsError::InvalidParams(e.to_string()))?;
    if !(p.g_alpha > T::zero()) {
        return Err(BoundsError::InvalidParams("gα must be positive".into()));
    }
    Ok(())
}

pub fn absorbing_constants<T: Real>(p: &PhysicalParams<T>, delta: T) -> Result<AbsorbingConstants<T>, BoundsError> {
    checked(p)?;
    let dt = p.delta_t();
    let ln = p.lambda1 * p.nu;
    let sqrt3 = T::lit(3.0).sqrt();
    let sh = p.h.sqrt();
    let k = p.g_alpha * dt * p.l / sqrt3;
    let absorbing_radius = (T::one() / p.g_alpha + T::one() / ln) * k * sh + delta;
    let k1 = T::lit(3.0) * k * k / (ln * ln) * (p.h / p.nu + dt * dt / (p.lambda1 * p.lambda1 * p.kappa.powi(3) * p.h));
    let beta = ln / T::lit(2.0);
    let a_barrier =
        p.g_alpha * p.g_alpha * dt * dt * p.l * p.l * p.h / (T::lit(6.0) * p.lambda1 * p.lambda1 * p.nu * p.nu * beta);
    let m_barrier = T::lit(2.0) * p.g_alpha * dt * dt * p.l / (sqrt3 * ln * sh);
    Ok(AbsorbingConstants {
        k,
        absorbing_radius,
        k1,
        beta,
        a_barrier,
        m_barrier,
    })
}

/// Comparison of `L/h` with `gα²(T₁−T₂)²L³/(νκ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectGate<T> {
    pub lhs: T,
    pub rhs: T,
    pub ratio: T,
    pub threshold: T,
    pub large: bool,
}

/// The expansion coefficient `α` enters squared, so it is passed separately
/// from the product `gα` carried by the parameters.
pub fn aspect_gate<T: Real>(p: &PhysicalParams<T>, alpha: T, threshold: T) -> Result<AspectGate<T>, BoundsError> {
    checked(p)?;
    if !(alpha > T::zero()) {
        return Err(BoundsError::InvalidParams("α must be positive".into()));
    }
    let dt = p.delta_t();
    let lhs = p.l / p.h;
    let rhs = p.g_alpha * alpha * dt * dt * p.l.powi(3) / (p.nu * p.kappa);
    let ratio = lhs / rhs;
    Ok(AspectGate {
        lhs,
        rhs,
        ratio,
        threshold,
        large: ratio > threshold,
    })
}

/// Argument of the logarithm in the settling time,
/// `√3·λ₁ν|u₀|/(gα(T₁−T₂)L·h^{1/2})`.
pub fn settling_argument<T: Real>(p: &PhysicalParams<T>, u0_norm: T) -> Result<T, BoundsError> {
    checked(p)?;
    Ok(T::lit(3.0).sqrt() * p.lambda1 * p.nu * u0_norm / (p.g_alpha * p.delta_t() * p.l * p.h.sqrt()))
}

/// `(1/λ₁ν)·ln(settling_argument)`, or 0 when the argument is at most 1.
pub fn settling_time<T: Real>(p: &PhysicalParams<T>, u0_norm: T) -> Result<T, BoundsError> {
    let arg = settling_argument(p, u0_norm)?;
    Ok(if arg <= T::one() {
        T::zero()
    } else {
        arg.ln() / (p.lambda1 * p.nu)
    })
}

/// Radius reached at the settling time by the pure decay, `K·h^{1/2}/(λ₁ν)`.
pub fn settled_radius<T: Real>(p: &PhysicalParams<T>) -> Result<T, BoundsError> {
    let c = absorbing_constants(p, T::zero())?;
    Ok(c.k * p.h.sqrt() / (p.lambda1 * p.nu))
}

/// Checks `T₂ − tol ≤ T ≤ T₁ + tol` on a series of `(t, T_min, T_max)`.
/// The margin is the distance to the nearer end of the range.
pub fn maximum_principle_monitor<T: Real>(
    series: &[(T, T, T)],
    t1: T,
    t2: T,
    tol: T,
) -> Result<EstimateReport<T>, BoundsError> {
    if series.is_empty() {
        return Err(BoundsError::Empty);
    }
    let slack: Vec<(T, T)> = series
        .iter()
        .map(|&(t, lo, hi)| (t, -((lo - t2).min(t1 - hi))))
        .collect();
    let mut r = EstimateReport::scan("maximum principle", &slack, |_| tol);
    r.margin -= tol;
    Ok(r)
}

/// `‖(T − level)₊‖_{L²}`.
pub fn overshoot_norm<T: Real>(temp: &ScalarField<T>, level: T) -> T {
    let f = temp.map(|v| (v - level).max(T::zero()));
    f.inner(&f).sqrt()
}

/// `‖(level − T)₊‖_{L²}`.
pub fn undershoot_norm<T: Real>(temp: &ScalarField<T>, level: T) -> T {
    let f = temp.map(|v| (level - v).max(T::zero()));
    f.inner(&f).sqrt()
}

/// Fitted decay rate of an overshoot series compared with `fraction·λ₁κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvershootReport<T> {
    pub rate: Option<T>,
    pub required: T,
    pub satisfied: bool,
}

pub fn overshoot_decay<T: Real>(series: &[(T, T)], lambda1: T, kappa: T, fraction: T) -> OvershootReport<T> {
    let rate = decay_rate_fit(series);
    let required = fraction * lambda1 * kappa;
    let satisfied = match rate {
        Some(r) => r >= required,
        None => series.iter().all(|p| p.1 == T::zero()),
    };
    OvershootReport {
        rate,
        required,
        satisfied,
    }
}
